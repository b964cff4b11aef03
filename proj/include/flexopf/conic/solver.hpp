#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flexopf/conic/program.hpp"

namespace flexopf::conic {

struct SolverOptions {
    double feas_tol = 1e-8;    ///< primal/dual feasibility tolerance
    double gap_tol = 1e-8;     ///< absolute complementarity gap tolerance
    double rel_gap_tol = 1e-8; ///< relative duality gap tolerance
    int max_iterations = 200;  ///< interior-point iteration cap

    double bb_abs_gap = 1e-6; ///< branch-and-bound absolute gap target
    double bb_rel_gap = 1e-4; ///< branch-and-bound relative gap target
    int node_limit = 100000;
    bool heuristic_only = false; ///< skip exact search, fix-and-resolve once
    int max_exact_binaries = 64; ///< above this, fall back to the heuristic
    double time_limit_s = 0.0;   ///< 0 disables the limit
    bool verbose = false;

    void check() const;
};

enum class SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NodeLimit,
    TimeLimit,
    GapLimit,
    Numerics,
};

const char *to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::Numerics;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    int iterations = 0;      ///< interior-point iterations (summed over nodes)
    int bb_nodes = 0;        ///< branch-and-bound nodes explored
    double bound_gap = 0.0;  ///< incumbent minus best lower bound
    double best_bound = 0.0; ///< best proven lower bound (minimization)
    bool heuristic = false;  ///< result came from the fix-and-resolve heuristic
    bool reduced_accuracy = false;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double comp_gap = 0.0;           ///< complementarity gap at the returned point
    double max_cone_violation = 0.0; ///< worst p^2+q^2 - v*i excess, normalized
    double max_row_violation = 0.0;  ///< worst linear row/bound violation
    std::string message;

    bool ok() const { return status == SolveStatus::Optimal || status == SolveStatus::GapLimit; }
    std::string to_json() const;
};

/// Hints the heuristic uses to fix a segment binary from the relaxed
/// energy-not-served value: y belongs to the interval (phi_lo, phi_hi] of
/// variable phi_var, with segment endpoint costs for tie-breaking.
struct BinaryHint {
    int binary_var = -1;
    int phi_var = -1;
    double phi_lo = 0.0;
    double phi_hi = 0.0;
    double cost_at_lo = 0.0;
    double cost_at_hi = 0.0;
};

/// Solves a continuous SOCP with a homogeneous self-dual interior-point
/// method (Nesterov-Todd scaled Mehrotra predictor-corrector; rotated cones
/// are embedded as standard cones via (v+i, v-i, 2p, 2q)). Binaries must be
/// absent or fixed by their bounds. Throws SolveError on infeasible or
/// failed solves unless `throw_on_failure` is false.
std::pair<std::vector<double>, SolveReport>
solve_socp(const ConicProgram &program, const SolverOptions &opts = {},
           bool throw_on_failure = true);

/// Solves the mixed-binary program. Exact mode runs best-first branch and
/// bound on fractional segment binaries; heuristic mode solves the
/// relaxation, fixes each binary group from the relaxed energy-not-served
/// value and re-solves, reporting the bound gap against the relaxation.
std::pair<std::vector<double>, SolveReport>
solve_misocp(const ConicProgram &program, const SolverOptions &opts = {},
             const std::vector<BinaryHint> &hints = {});

/// Normalized slack (v*i - p^2 - q^2) / max(1, v*i) per rotated cone.
std::vector<double> cone_gaps(const ConicProgram &program, const std::vector<double> &point);

/// Worst violation of linear rows and variable bounds at a point.
double max_linear_violation(const ConicProgram &program, const std::vector<double> &point);

} // namespace flexopf::conic
