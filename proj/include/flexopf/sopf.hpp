#pragma once

#include <tuple>
#include <vector>

#include "flexopf/conic/program.hpp"
#include "flexopf/conic/solver.hpp"
#include "flexopf/netmodel.hpp"
#include "flexopf/pools.hpp"
#include "flexopf/scenario.hpp"

namespace flexopf {

struct SopfOptions {
    /// Base case: widened operating limits, no energy shortfall, charge as
    /// soon as possible.
    bool base_case = false;
    /// Drop segment binaries when every pool utility is convex-eligible.
    bool drop_binaries_when_convex = true;
    /// Widened limits used by the base case.
    double wide_v_min = 0.2;            ///< pu
    double wide_limit_factor = 20.0;    ///< multiplies ampacities and pool caps
    /// Scale of the earliest-period preference weights, relative to the
    /// price scale; small enough to never override an economic trade-off.
    double asap_eps = 1e-6;
    /// Assemble per-scenario row blocks in parallel (merged in fixed order).
    ExecMode exec = ExecMode::OpenMP;
};

/// Assembled program plus the heuristic fixing hints for its binaries.
struct SopfProgram {
    conic::ConicProgram program;
    std::vector<conic::BinaryHint> hints;
    int pools = 0;
    int periods = 0;
    int scenarios = 0;
    int tasks = 0;
    bool binaries_dropped = false;
};

/// Builds the two-stage stochastic program: first-stage reserves per pool
/// and period; per-scenario pool schedules, energy shortfalls and their
/// utility encodings; per period and scenario the branch-flow network rows
/// with one rotated cone per branch.
///
/// Variable count (documented closed form, asserted by tests):
///   S*T reserves
///   + per scenario: S*T mismatches + sum of task window lengths
///     + N task shortfalls + 2*S pool shortfall/cost
///     + S*(2*kappa_s+1) multipliers (+ S*kappa_s binaries unless dropped)
///   + per (period, scenario): (nodes-1) voltages + branches * (current,
///     active flow, reactive flow); the substation voltage is a constant.
SopfProgram build_sopf(const NetworkModel &net, const std::vector<ChargingPoolSpec> &pools,
                       const ScenarioSet &scenarios, const SopfOptions &options = {});

/// The relaxed-limits reference case: charge every task in full as soon as
/// possible. Implemented as build_sopf with base_case set.
SopfProgram base_case_program(const NetworkModel &net,
                              const std::vector<ChargingPoolSpec> &pools,
                              const ScenarioSet &scenarios, const SopfOptions &options = {});

/// Variable lookup tables recovered from program metadata.
struct SopfVarMaps {
    int pools = 0, periods = 0, scenarios = 0, tasks = 0, nodes = 0, branches = 0;
    std::vector<std::vector<int>> reserve;                 ///< [s][t]
    std::vector<std::vector<std::vector<int>>> mismatch;   ///< [s][t][w]
    std::vector<std::vector<std::vector<int>>> task_power; ///< [n][t][w], -1 out of window
    std::vector<std::vector<int>> task_shortfall;          ///< [n][w]
    std::vector<std::vector<int>> pool_shortfall;          ///< [s][w]
    std::vector<std::vector<int>> flex_cost;               ///< [s][w]
    std::vector<std::vector<std::vector<int>>> volt_sq;    ///< [node][t][w], -1 substation
    std::vector<std::vector<std::vector<int>>> curr_sq;    ///< [branch][t][w]
    std::vector<std::vector<std::vector<int>>> flow_p;     ///< [branch][t][w]
    std::vector<std::vector<std::vector<int>>> flow_q;     ///< [branch][t][w]
};

SopfVarMaps build_var_maps(const conic::ConicProgram &program);

/// Extracted optimum in model coordinates.
struct SopfSolution {
    conic::SolveStatus status = conic::SolveStatus::Numerics;
    double objective = 0.0;
    int pools = 0, periods = 0, scenarios = 0, tasks = 0;
    std::vector<double> probabilities;

    std::vector<std::vector<double>> reserve;                 ///< p*[s][t] pu
    std::vector<std::vector<std::vector<double>>> mismatch;   ///< rho*[s][t][w] pu
    std::vector<std::vector<std::vector<double>>> task_power; ///< x*[n][t][w] pu
    std::vector<std::vector<double>> task_shortfall;          ///< phi*[n][w] kWh
    std::vector<std::vector<double>> pool_shortfall;          ///< Phi*[s][w] kWh
    std::vector<std::vector<double>> flex_cost;               ///< Z*[s][w] currency

    std::vector<std::vector<std::vector<double>>> volt_sq; ///< [node][t][w] pu^2
    std::vector<std::vector<std::vector<double>>> curr_sq; ///< [branch][t][w] pu^2
    std::vector<std::vector<std::vector<double>>> flow_p;  ///< [branch][t][w] pu
    std::vector<std::vector<std::vector<double>>> flow_q;  ///< [branch][t][w] pu

    std::vector<double> cone_gap; ///< per cone, program order
    double max_cone_violation = 0.0;
    double bound_gap = 0.0;
    bool heuristic = false;
    int iterations = 0;
    int bb_nodes = 0;

    double pool_draw(int s, int t, int w) const { return reserve[s][t] + mismatch[s][t][w]; }
    /// Expected flexibility cost sum_w pi_w sum_s Z.
    double expected_flex_cost() const;
};

/// Maps a solver point back to model coordinates and verifies that every
/// stored value satisfies its rows and bounds within `tol` (throws
/// ValidationError naming the first offending row otherwise).
SopfSolution extract_solution(const NetworkModel &net, const conic::ConicProgram &program,
                              const std::vector<double> &point,
                              const conic::SolveReport &report,
                              const std::vector<double> &probabilities = {}, double tol = 1e-6);

/// Per-branch-period-scenario relaxation gaps plus the exactness
/// preconditions (no binding upper voltage bound).
struct ExactnessReport {
    double max_gap = 0.0; ///< worst cone slack (v*i - p^2 - q^2)/max(1, v*i)
    std::vector<std::tuple<int, int, int>> gaps_above_tol; ///< (branch, t, w)
    std::vector<std::tuple<int, int, int>> binding_upper_voltage; ///< (node, t, w)
    bool ok() const { return gaps_above_tol.empty() && binding_upper_voltage.empty(); }
};

ExactnessReport check_exactness(const NetworkModel &net, const SopfSolution &solution,
                                double tol = 1e-6);

} // namespace flexopf
