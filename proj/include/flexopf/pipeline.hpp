#pragma once

#include <string>
#include <vector>

#include "flexopf/config.hpp"
#include "flexopf/flexarea.hpp"
#include "flexopf/sopf.hpp"
#include "flexopf/validate.hpp"

namespace flexopf {

/// One planning solve: build, optimize, restore the exact network state,
/// extract and check.
struct PlanOutputs {
    SopfProgram build;
    std::vector<double> point;
    conic::SolveReport report;
    SopfSolution solution;
    TightenResult tighten;
    ExactnessReport exactness;
};

PlanOutputs solve_plan(const NetworkModel &net, const std::vector<ChargingPoolSpec> &pools,
                       const ScenarioSet &scens, const SopfOptions &sopf_options,
                       const conic::SolverOptions &solver_options, bool restore_exactness);

/// Per-period extremes of a solved plan across its scenarios.
struct SolutionTraces {
    std::vector<double> mean_min_v, lo_min_v, hi_min_v;             ///< pu
    std::vector<double> mean_max_i_amp, lo_max_i_amp, hi_max_i_amp; ///< A
    std::vector<double> substation_mean_i_amp;
    std::string to_csv() const;
};

SolutionTraces solution_traces(const NetworkModel &net, const SopfSolution &solution);

/// Exit codes of the command-line pipeline.
constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSolverLimit = 4;

/// Runs the configured pipeline and writes all artifacts plus a manifest
/// with content hashes into cfg.out_dir. On failure writes error.json and
/// returns the matching exit code.
int run(const RunConfig &cfg);

} // namespace flexopf
