#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flexopf/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string beta;
    int scenarios = -1;
    long long seed = -1;
};

void add_common(CLI::App *cmd, CommonArgs &args) {
    cmd->add_option("--config", args.config_path, "run configuration JSON")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--beta", args.beta, "scalar risk level in [0,1] (overrides config)");
    cmd->add_option("--scenarios", args.scenarios, "scenario count (overrides config)");
    cmd->add_option("--seed", args.seed, "scenario seed (overrides config)");
}

int run_with_mode(const CommonArgs &args, std::optional<flexopf::RunMode> forced_mode) {
    flexopf::ConfigOverrides ov;
    if (!args.out_dir.empty()) {
        ov.out_dir = args.out_dir;
    }
    if (args.scenarios >= 0) {
        ov.scenario_count = args.scenarios;
    }
    if (args.seed >= 0) {
        ov.scenario_seed = static_cast<std::uint64_t>(args.seed);
    }
    if (!args.beta.empty()) {
        try {
            ov.beta = std::stod(args.beta);
        } catch (...) {
            std::fprintf(stderr, "error: --beta must be a number\n");
            return flexopf::kExitConfigError;
        }
    }
    if (forced_mode) {
        ov.mode = *forced_mode;
    }
    try {
        const flexopf::RunConfig cfg = flexopf::load_config(args.config_path, ov);
        return flexopf::run(cfg);
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return flexopf::kExitConfigError;
    }
}

int report_command(const std::string &out_dir) {
    const std::string path = out_dir + "/manifest.json";
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "error: no manifest at %s\n", path.c_str());
        return flexopf::kExitConfigError;
    }
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return flexopf::kExitConfigError;
    }
    std::printf("run mode: %s\n",
                manifest["config"]["mode"].get<std::string>().c_str());
    std::printf("outputs:\n");
    for (const auto &o : manifest["outputs"]) {
        std::printf("  %-28s fnv1a64=%s\n", o["path"].get<std::string>().c_str(),
                    o["fnv1a64"].get<std::string>().c_str());
    }
    for (const char *name : {"base_summary.json", "flex_summary.json"}) {
        std::ifstream sin(out_dir + "/" + name);
        if (!sin) {
            continue;
        }
        nlohmann::json s;
        sin >> s;
        std::printf("%s:\n", name);
        std::printf("  status:             %s\n", s["status"].get<std::string>().c_str());
        std::printf("  objective:          %.6f\n", s["objective"].get<double>());
        std::printf("  expected flex cost: %.6f\n", s["expected_flex_cost"].get<double>());
        std::printf("  max cone slack:     %.3e\n", s["max_cone_slack"].get<double>());
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Day-ahead flexibility planning for EV charging pools on radial networks"};
    app.require_subcommand(1);

    CommonArgs plan_args, validate_args, payment_args;
    std::string report_dir = "out";

    CLI::App *plan = app.add_subcommand(
        "plan", "solve the day-ahead plan (mode from config: base, flex or full)");
    add_common(plan, plan_args);
    CLI::App *validate = app.add_subcommand(
        "validate", "solve the plan and validate its areas by Monte-Carlo power flow");
    add_common(validate, validate_args);
    CLI::App *payment = app.add_subcommand(
        "payment", "solve the plan and run the payment analysis with areas as caps");
    add_common(payment, payment_args);
    CLI::App *report = app.add_subcommand("report", "summarize a finished run directory");
    report->add_option("--out", report_dir, "run directory to summarize");

    CLI11_PARSE(app, argc, argv);

    if (plan->parsed()) {
        return run_with_mode(plan_args, std::nullopt);
    }
    if (validate->parsed()) {
        return run_with_mode(validate_args, flexopf::RunMode::Validate);
    }
    if (payment->parsed()) {
        return run_with_mode(payment_args, flexopf::RunMode::Payment);
    }
    return report_command(report_dir);
}
