#include "flexopf/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flexopf {

using nlohmann::json;

RunMode parse_run_mode(const std::string &s) {
    if (s == "base") return RunMode::Base;
    if (s == "flex") return RunMode::Flex;
    if (s == "validate") return RunMode::Validate;
    if (s == "payment") return RunMode::Payment;
    if (s == "full") return RunMode::Full;
    throw ValidationError("unknown mode '" + s + "' (base|flex|validate|payment|full)");
}

const char *to_string(RunMode m) {
    switch (m) {
    case RunMode::Base: return "base";
    case RunMode::Flex: return "flex";
    case RunMode::Validate: return "validate";
    case RunMode::Payment: return "payment";
    case RunMode::Full: return "full";
    }
    return "?";
}

void RunConfig::check() const {
    if (network_path.empty() || pools_path.empty()) {
        throw ValidationError("config needs 'network' and 'pools' paths");
    }
    if (scenario_count < 1 || validation_sims < 1 || payment_scenarios < 1) {
        throw ValidationError("scenario and simulation counts must be at least 1");
    }
    auto beta_ok = [](double b) { return b >= 0.0 && b <= 1.0; };
    if (!beta_ok(beta)) {
        throw ValidationError("beta must lie in [0, 1]");
    }
    for (const BetaOverride &o : beta_overrides) {
        if (!beta_ok(o.beta)) {
            throw ValidationError("beta override must lie in [0, 1]");
        }
        if (o.period < 0) {
            throw ValidationError("beta override needs a nonnegative period");
        }
    }
    for (double b : payment_betas) {
        if (!beta_ok(b)) {
            throw ValidationError("payment beta values must lie in [0, 1]");
        }
    }
    if (payment_betas.empty()) {
        throw ValidationError("payment mode needs at least one beta value");
    }
    solver.check();
}

RunConfig parse_config(const std::string &json_text, const std::string &origin,
                       const ConfigOverrides &overrides) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception &e) {
        throw ParseError("config " + origin + ": " + e.what());
    }

    RunConfig cfg;
    cfg.version = doc.value("version", 1);
    if (cfg.version != 1) {
        throw ValidationError("unsupported config version " + std::to_string(cfg.version));
    }
    cfg.network_path = doc.value("network", "");
    cfg.pools_path = doc.value("pools", "");
    cfg.out_dir = doc.value("out_dir", "out");
    cfg.mode = parse_run_mode(doc.value("mode", "full"));

    if (doc.contains("scenarios")) {
        const json &s = doc["scenarios"];
        cfg.scenario_count = s.value("count", cfg.scenario_count);
        cfg.scenario_seed = s.value("seed", cfg.scenario_seed);
    }
    if (doc.contains("beta")) {
        const json &b = doc["beta"];
        if (b.is_number()) {
            cfg.beta = b.get<double>();
        } else {
            cfg.beta = b.value("default", cfg.beta);
            if (b.contains("overrides")) {
                for (const auto &o : b["overrides"]) {
                    BetaOverride ov;
                    ov.pool_id = o.at("pool").get<std::string>();
                    ov.period = o.at("period").get<int>();
                    ov.beta = o.at("beta").get<double>();
                    cfg.beta_overrides.push_back(ov);
                }
            }
        }
    }
    if (doc.contains("solver")) {
        const json &s = doc["solver"];
        cfg.solver.feas_tol = s.value("feas_tol", cfg.solver.feas_tol);
        cfg.solver.gap_tol = s.value("gap_tol", cfg.solver.gap_tol);
        cfg.solver.rel_gap_tol = s.value("rel_gap_tol", cfg.solver.rel_gap_tol);
        cfg.solver.max_iterations = s.value("max_iterations", cfg.solver.max_iterations);
        cfg.solver.bb_abs_gap = s.value("bb_abs_gap", cfg.solver.bb_abs_gap);
        cfg.solver.bb_rel_gap = s.value("bb_rel_gap", cfg.solver.bb_rel_gap);
        cfg.solver.node_limit = s.value("node_limit", cfg.solver.node_limit);
        cfg.solver.heuristic_only = s.value("heuristic_only", cfg.solver.heuristic_only);
        cfg.solver.max_exact_binaries =
            s.value("max_exact_binaries", cfg.solver.max_exact_binaries);
        cfg.solver.time_limit_s = s.value("time_limit_s", cfg.solver.time_limit_s);
        cfg.solver.verbose = s.value("verbose", cfg.solver.verbose);
    }
    if (doc.contains("validation")) {
        const json &v = doc["validation"];
        cfg.validation_sims = v.value("sims", cfg.validation_sims);
        cfg.validation_seed = v.value("seed", cfg.validation_seed);
    }
    if (doc.contains("payment")) {
        const json &p = doc["payment"];
        cfg.payment_scenarios = p.value("scenarios", cfg.payment_scenarios);
        cfg.payment_seed = p.value("seed", cfg.payment_seed);
        if (p.contains("betas")) {
            cfg.payment_betas = p["betas"].get<std::vector<double>>();
        }
    }
    cfg.restore_exactness = doc.value("restore_exactness", cfg.restore_exactness);
    const std::string exec = doc.value("exec", "openmp");
    if (exec == "serial") {
        cfg.exec = ExecMode::Serial;
    } else if (exec == "openmp") {
        cfg.exec = ExecMode::OpenMP;
    } else {
        throw ValidationError("exec must be 'serial' or 'openmp'");
    }

    if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
    if (overrides.scenario_count) cfg.scenario_count = *overrides.scenario_count;
    if (overrides.scenario_seed) cfg.scenario_seed = *overrides.scenario_seed;
    if (overrides.beta) cfg.beta = *overrides.beta;
    if (overrides.mode) cfg.mode = *overrides.mode;

    cfg.check();
    return cfg;
}

RunConfig load_config(const std::string &path, const ConfigOverrides &overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open config file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path, overrides);
}

std::string config_to_json(const RunConfig &cfg) {
    // The output directory is deliberately omitted: the manifest lives in it,
    // and runs into different directories must stay byte-identical.
    json j;
    j["version"] = cfg.version;
    j["network"] = cfg.network_path;
    j["pools"] = cfg.pools_path;
    j["mode"] = to_string(cfg.mode);
    j["scenarios"] = {{"count", cfg.scenario_count}, {"seed", cfg.scenario_seed}};
    json beta;
    beta["default"] = cfg.beta;
    json ov = json::array();
    for (const BetaOverride &o : cfg.beta_overrides) {
        ov.push_back({{"pool", o.pool_id}, {"period", o.period}, {"beta", o.beta}});
    }
    beta["overrides"] = ov;
    j["beta"] = beta;
    j["solver"] = {{"feas_tol", cfg.solver.feas_tol},
                   {"gap_tol", cfg.solver.gap_tol},
                   {"rel_gap_tol", cfg.solver.rel_gap_tol},
                   {"max_iterations", cfg.solver.max_iterations},
                   {"bb_abs_gap", cfg.solver.bb_abs_gap},
                   {"bb_rel_gap", cfg.solver.bb_rel_gap},
                   {"node_limit", cfg.solver.node_limit},
                   {"heuristic_only", cfg.solver.heuristic_only},
                   {"max_exact_binaries", cfg.solver.max_exact_binaries},
                   {"time_limit_s", cfg.solver.time_limit_s}};
    j["validation"] = {{"sims", cfg.validation_sims}, {"seed", cfg.validation_seed}};
    j["payment"] = {{"scenarios", cfg.payment_scenarios},
                    {"seed", cfg.payment_seed},
                    {"betas", cfg.payment_betas}};
    j["restore_exactness"] = cfg.restore_exactness;
    j["exec"] = cfg.exec == ExecMode::Serial ? "serial" : "openmp";
    return j.dump(2);
}

} // namespace flexopf
