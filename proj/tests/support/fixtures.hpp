#pragma once

// Small shared instances for the planning-stack tests.

#include <string>
#include <vector>

#include "flexopf/netmodel.hpp"
#include "flexopf/pools.hpp"
#include "flexopf/scenario.hpp"

namespace flexopf::test {

/// Substation -> node "2" over one branch; optional second branch to "3".
inline NetworkModel small_network(int periods = 2, int nodes = 2, double r = 0.02,
                                  double x = 0.02, double cap_pu = 3.0) {
    NetworkModel m;
    m.periods = periods;
    m.delta_t = 1.0;
    m.v_min = 0.9;
    m.v_max = 1.05;
    m.s_base = 1e6;
    m.v_base = 11e3;
    for (int i = 0; i < nodes; ++i) {
        m.node_ids.push_back(std::to_string(i + 1));
    }
    m.substation = 0;
    for (int i = 1; i < nodes; ++i) {
        Branch b;
        b.from = i - 1;
        b.to = i;
        b.resistance = r;
        b.reactance = x;
        b.current_cap = cap_pu;
        m.branches.push_back(b);
    }
    m.base_demand_p.assign(nodes, std::vector<double>(periods, 0.0));
    m.base_demand_q.assign(nodes, std::vector<double>(periods, 0.0));
    m.parent_branch.assign(nodes, -1);
    m.child_branches.assign(nodes, {});
    for (int b = 0; b < m.branch_count(); ++b) {
        m.parent_branch[m.branches[b].to] = b;
        m.child_branches[m.branches[b].from].push_back(b);
    }
    for (int i = 0; i < nodes; ++i) {
        m.order_from_root.push_back(i);
    }
    return m;
}

inline ChargingPoolSpec small_pool(const NetworkModel &net, const std::string &node = "2",
                                   int tasks = 1, double p_max_kw = 200.0) {
    ChargingPoolSpec p;
    p.pool_id = "pool_" + node;
    p.node_id = node;
    p.node = net.node_index(node);
    p.p_max.assign(net.periods, net.kw_to_pu(p_max_kw));
    p.energy_price.assign(net.periods, 0.2);
    p.utility.alpha = {0.0, 20.0, 60.0, 500.0};
    p.utility.slope = {1.5, 0.5, 3.0};
    p.utility.intercept = {0.0, 20.0, -130.0};
    for (int i = 0; i < tasks; ++i) {
        TaskSpec t;
        t.task_id = "t" + std::to_string(i + 1);
        t.mean_arrival = std::min(net.periods - 2, i % std::max(1, net.periods - 2));
        t.mean_duration_rate = 0.4;
        t.e_min = 0.0;
        t.e_max = 60.0;
        t.x_max = 22.0;
        p.tasks.push_back(t);
    }
    return p;
}

} // namespace flexopf::test
