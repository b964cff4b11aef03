#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flexopf/common.hpp"
#include "flexopf/conic/solver.hpp"

namespace flexopf {

enum class RunMode { Base, Flex, Validate, Payment, Full };

RunMode parse_run_mode(const std::string &s);
const char *to_string(RunMode m);

struct BetaOverride {
    std::string pool_id;
    int period = -1;
    double beta = 0.0;
};

/// Versioned run configuration. CLI flags override file fields; overrides
/// are applied through the std::optional members.
struct RunConfig {
    int version = 1;
    std::string network_path;
    std::string pools_path;
    std::string out_dir = "out";
    RunMode mode = RunMode::Full;

    int scenario_count = 50;
    std::uint64_t scenario_seed = 1;

    double beta = 0.9;
    std::vector<BetaOverride> beta_overrides;

    conic::SolverOptions solver;

    int validation_sims = 1000;
    std::uint64_t validation_seed = 7;

    int payment_scenarios = 100;
    std::uint64_t payment_seed = 11;
    std::vector<double> payment_betas = {0.25, 0.57, 0.9, 0.99};

    bool restore_exactness = true;
    ExecMode exec = ExecMode::OpenMP;

    void check() const;
};

/// Optional command-line overrides, applied after the file is parsed.
struct ConfigOverrides {
    std::optional<std::string> out_dir;
    std::optional<int> scenario_count;
    std::optional<std::uint64_t> scenario_seed;
    std::optional<double> beta;
    std::optional<RunMode> mode;
};

RunConfig load_config(const std::string &path, const ConfigOverrides &overrides = {});
RunConfig parse_config(const std::string &json_text, const std::string &origin,
                       const ConfigOverrides &overrides = {});

/// Deterministic rendering of the resolved configuration (for manifests).
std::string config_to_json(const RunConfig &cfg);

} // namespace flexopf
