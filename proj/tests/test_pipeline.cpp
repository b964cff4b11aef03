#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flexopf/pipeline.hpp"

using namespace flexopf;
namespace fs = std::filesystem;

namespace {

std::string data_path(const char *name) {
    return std::string(FLEXOPF_DATA_DIR) + "/" + name;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig tiny_config(const std::string &out_dir) {
    RunConfig cfg;
    cfg.network_path = data_path("network34.json");
    cfg.pools_path = data_path("pools34.json");
    cfg.out_dir = out_dir;
    cfg.mode = RunMode::Flex;
    cfg.scenario_count = 3;
    cfg.scenario_seed = 2;
    cfg.beta = 0.9;
    cfg.solver.heuristic_only = true;
    cfg.validation_sims = 50;
    cfg.validation_seed = 7;
    cfg.payment_scenarios = 3;
    cfg.payment_seed = 11;
    cfg.payment_betas = {0.5};
    return cfg;
}

} // namespace

TEST_CASE("config parsing, overrides and validation") {
    const std::string text = R"({
      "version": 1,
      "network": "net.json",
      "pools": "pools.json",
      "mode": "flex",
      "scenarios": {"count": 7, "seed": 3},
      "beta": {"default": 0.8, "overrides": [{"pool": "cp16", "period": 4, "beta": 0.2}]},
      "solver": {"heuristic_only": true, "feas_tol": 1e-9},
      "validation": {"sims": 123, "seed": 5}
    })";
    ConfigOverrides ov;
    ov.scenario_count = 9;
    const RunConfig cfg = parse_config(text, "<test>", ov);
    CHECK(cfg.scenario_count == 9); // CLI wins over the file
    CHECK(cfg.scenario_seed == 3);
    CHECK(cfg.beta == doctest::Approx(0.8));
    CHECK(cfg.beta_overrides.size() == 1);
    CHECK(cfg.solver.feas_tol == doctest::Approx(1e-9));
    CHECK(cfg.validation_sims == 123);

    // invalid beta fails validation before anything runs
    const std::string bad = R"({"network": "n", "pools": "p", "beta": 1.5})";
    CHECK_THROWS_AS(parse_config(bad, "<test>"), ValidationError);

    // resolved config renders deterministically
    CHECK(config_to_json(cfg) == config_to_json(cfg));
}

TEST_CASE("flex run writes a complete hashed manifest") {
    const fs::path dir = fs::temp_directory_path() / "flexopf_test_run";
    fs::remove_all(dir);
    const RunConfig cfg = tiny_config(dir.string());
    REQUIRE(run(cfg) == kExitOk);

    const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    int checked = 0;
    for (const auto &o : manifest["outputs"]) {
        const std::string name = o["path"].get<std::string>();
        const std::string content = slurp(dir / name);
        CHECK(o["fnv1a64"].get<std::string>() == to_hex(fnv1a64(content)));
        ++checked;
    }
    CHECK(checked >= 5); // scenarios, summary, traces, reserve, areas...
    CHECK(fs::exists(dir / "areas.csv"));
    CHECK(fs::exists(dir / "flex_summary.json"));
    fs::remove_all(dir);
}

TEST_CASE("areas csv has one row per pool and period") {
    const fs::path dir = fs::temp_directory_path() / "flexopf_test_rows";
    fs::remove_all(dir);
    const RunConfig cfg = tiny_config(dir.string());
    REQUIRE(run(cfg) == kExitOk);
    const std::string csv = slurp(dir / "areas.csv");
    // 4 pools x 24 periods + header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4 * 24 + 1);
    fs::remove_all(dir);
}

TEST_CASE("an impossible voltage floor exits as infeasible") {
    const fs::path dir = fs::temp_directory_path() / "flexopf_test_infeas";
    fs::remove_all(dir);
    fs::create_directories(dir);
    // Tighten the bundled network's voltage floor until base demand alone
    // cannot satisfy it.
    nlohmann::json net = nlohmann::json::parse(slurp(data_path("network34.json")));
    net["limits"]["v_min_pu"] = 0.9995;
    {
        std::ofstream out(dir / "net.json");
        out << net.dump();
    }
    RunConfig cfg = tiny_config((dir / "out").string());
    cfg.network_path = (dir / "net.json").string();
    cfg.scenario_count = 2;
    CHECK(run(cfg) == kExitInfeasible);
    const nlohmann::json err = nlohmann::json::parse(slurp(dir / "out" / "error.json"));
    CHECK(err["error"]["exit_code"].get<int>() == kExitInfeasible);
    fs::remove_all(dir);
}

TEST_CASE("failures produce a machine-readable error file and exit code") {
    const fs::path dir = fs::temp_directory_path() / "flexopf_test_err";
    fs::remove_all(dir);
    RunConfig cfg = tiny_config(dir.string());
    cfg.network_path = "does_not_exist.json";
    CHECK(run(cfg) == kExitConfigError);
    const nlohmann::json err = nlohmann::json::parse(slurp(dir / "error.json"));
    CHECK(err["error"]["exit_code"].get<int>() == kExitConfigError);
    CHECK(err["error"]["stage"].get<std::string>() == "load_inputs");
    fs::remove_all(dir);
}
