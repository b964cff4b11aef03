#include "flexopf/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flexopf {

double PowerFlowState::min_voltage() const {
    double v = std::numeric_limits<double>::max();
    for (double vs : volt_sq) {
        v = std::min(v, vs);
    }
    return std::sqrt(v);
}

PowerFlowState sweep_power_flow(const NetworkModel &net, const std::vector<double> &p_injection,
                                const std::vector<double> &q_injection, double tol,
                                int max_iter) {
    const int n = net.node_count();
    const int nb = net.branch_count();
    if (static_cast<int>(p_injection.size()) != n || static_cast<int>(q_injection.size()) != n) {
        throw ValidationError("power flow injections must cover every node");
    }

    PowerFlowState st;
    st.volt_sq.assign(n, net.v_substation * net.v_substation);
    st.curr_sq.assign(nb, 0.0);
    st.flow_p.assign(nb, 0.0);
    st.flow_q.assign(nb, 0.0);

    for (st.iterations = 1; st.iterations <= max_iter; ++st.iterations) {
        // Backward: accumulate receiving-end flows from the leaves up; the
        // current uses the present voltage iterate at the receiving node.
        for (int k = n - 1; k >= 0; --k) {
            const int v = net.order_from_root[k];
            if (v == net.substation) {
                continue;
            }
            const int b = net.parent_branch[v];
            double p = p_injection[v];
            double q = q_injection[v];
            for (int cb : net.child_branches[v]) {
                p += st.flow_p[cb] + net.branches[cb].resistance * st.curr_sq[cb];
                q += st.flow_q[cb] + net.branches[cb].reactance * st.curr_sq[cb];
            }
            st.flow_p[b] = p;
            st.flow_q[b] = q;
            st.curr_sq[b] = (p * p + q * q) / st.volt_sq[v];
        }

        // Forward: push voltages from the substation down.
        double change = 0.0;
        for (int k = 0; k < n; ++k) {
            const int v = net.order_from_root[k];
            if (v == net.substation) {
                continue;
            }
            const int b = net.parent_branch[v];
            const Branch &br = net.branches[b];
            const double up = st.volt_sq[br.from];
            const double vs = up - 2.0 * (br.resistance * st.flow_p[b] + br.reactance * st.flow_q[b]) -
                              (br.resistance * br.resistance + br.reactance * br.reactance) *
                                  st.curr_sq[b];
            if (!(vs > 0.0) || !std::isfinite(vs)) {
                throw SolveError("power flow voltage collapse at node " + net.node_ids[v]);
            }
            change = std::max(change, std::abs(vs - st.volt_sq[v]));
            st.volt_sq[v] = vs;
        }
        st.residual = change;
        if (change <= tol) {
            return st;
        }
    }
    throw SolveError("power flow did not converge within " + std::to_string(max_iter) +
                     " iterations (residual " + std::to_string(st.residual) + ")");
}

std::vector<PowerFlowState> power_flow(const NetworkModel &net,
                                       const std::vector<std::vector<double>> &p_injection,
                                       const std::vector<std::vector<double>> &q_injection,
                                       double tol, int max_iter) {
    std::vector<PowerFlowState> states;
    states.reserve(net.periods);
    std::vector<double> p(net.node_count()), q(net.node_count());
    for (int t = 0; t < net.periods; ++t) {
        for (int v = 0; v < net.node_count(); ++v) {
            p[v] = p_injection[v][t];
            q[v] = q_injection[v][t];
        }
        states.push_back(sweep_power_flow(net, p, q, tol, max_iter));
    }
    return states;
}

} // namespace flexopf
