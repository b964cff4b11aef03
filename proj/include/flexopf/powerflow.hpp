#pragma once

#include <vector>

#include "flexopf/netmodel.hpp"

namespace flexopf {

/// Converged branch-flow state of one period. Flows are receiving-end
/// quantities: flow_p[b] is the power arriving at branches[b].to, losses are
/// carried by the upstream balance.
struct PowerFlowState {
    std::vector<double> volt_sq; ///< per node, pu^2
    std::vector<double> curr_sq; ///< per branch, pu^2
    std::vector<double> flow_p;  ///< per branch, pu
    std::vector<double> flow_q;  ///< per branch, pu
    double residual = 0.0;       ///< last successive change of volt_sq
    int iterations = 0;

    double min_voltage() const; ///< pu, over all nodes
};

/// Fixed-point backward/forward sweep for one period of a radial network.
/// `p_injection`/`q_injection` are nodal consumptions in pu (base demand
/// plus any pool draw). Voltage and current limits are not enforced.
/// Throws SolveError on non-convergence or voltage collapse.
PowerFlowState sweep_power_flow(const NetworkModel &net, const std::vector<double> &p_injection,
                                const std::vector<double> &q_injection, double tol = 1e-12,
                                int max_iter = 200);

/// All periods of the horizon; injections indexed [node][period].
std::vector<PowerFlowState> power_flow(const NetworkModel &net,
                                       const std::vector<std::vector<double>> &p_injection,
                                       const std::vector<std::vector<double>> &q_injection,
                                       double tol = 1e-12, int max_iter = 200);

} // namespace flexopf
