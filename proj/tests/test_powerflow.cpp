#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flexopf/netmodel.hpp"
#include "flexopf/powerflow.hpp"
#include "flexopf/scenario.hpp"

using namespace flexopf;

namespace {

NetworkModel two_bus(double r = 0.05, double x = 0.05) {
    NetworkModel m;
    m.node_ids = {"1", "2"};
    m.substation = 0;
    m.branches = {{0, 1, r, x, 10.0}};
    m.base_demand_p.assign(2, std::vector<double>(1, 0.0));
    m.base_demand_q.assign(2, std::vector<double>(1, 0.0));
    m.periods = 1;
    m.parent_branch = {-1, 0};
    m.child_branches = {{0}, {}};
    m.order_from_root = {0, 1};
    return m;
}

/// Random radial network with `n` nodes: node k attaches to a random
/// earlier node, impedances and loads drawn from the shared counter RNG.
NetworkModel random_radial(std::uint64_t seed, int n) {
    NetworkModel m;
    m.periods = 1;
    for (int i = 0; i < n; ++i) {
        m.node_ids.push_back(std::to_string(i + 1));
    }
    m.substation = 0;
    for (int i = 1; i < n; ++i) {
        const int parent =
            static_cast<int>(rng::uniform01(seed, 1, i, 1) * i); // in [0, i)
        Branch b;
        b.from = parent;
        b.to = i;
        b.resistance = 0.005 + 0.03 * rng::uniform01(seed, 1, i, 2);
        b.reactance = 0.005 + 0.03 * rng::uniform01(seed, 1, i, 3);
        b.current_cap = 10.0;
        m.branches.push_back(b);
    }
    m.base_demand_p.assign(n, std::vector<double>(1, 0.0));
    m.base_demand_q.assign(n, std::vector<double>(1, 0.0));
    for (int i = 1; i < n; ++i) {
        m.base_demand_p[i][0] = 0.04 * rng::uniform01(seed, 2, i, 1);
        m.base_demand_q[i][0] = 0.02 * rng::uniform01(seed, 2, i, 2);
    }
    // orient + order
    m.parent_branch.assign(n, -1);
    m.child_branches.assign(n, {});
    for (int b = 0; b < m.branch_count(); ++b) {
        m.parent_branch[m.branches[b].to] = b;
        m.child_branches[m.branches[b].from].push_back(b);
    }
    m.order_from_root.clear();
    for (int i = 0; i < n; ++i) {
        m.order_from_root.push_back(i); // parents precede children by construction
    }
    return m;
}

} // namespace

TEST_CASE("zero injections give the flat fixed point") {
    const NetworkModel net = two_bus();
    const auto st = sweep_power_flow(net, {0.0, 0.0}, {0.0, 0.0});
    CHECK(st.volt_sq[1] == doctest::Approx(1.0));
    CHECK(st.curr_sq[0] == doctest::Approx(0.0));
    CHECK(st.iterations <= 2);
}

TEST_CASE("two-bus load matches the closed-form quadratic root") {
    const double R = 0.05, X = 0.05, P = 0.1, Q = 0.05;
    const NetworkModel net = two_bus(R, X);
    const auto st = sweep_power_flow(net, {0.0, P}, {0.0, Q});

    const double bcoef = 1.0 - 2.0 * (R * P + X * Q);
    const double c = (R * R + X * X) * (P * P + Q * Q);
    const double u_exact = 0.5 * (bcoef + std::sqrt(bcoef * bcoef - 4.0 * c));
    CHECK(st.volt_sq[1] == doctest::Approx(u_exact).epsilon(1e-10));
    CHECK(st.flow_p[0] == doctest::Approx(P));
    CHECK(st.curr_sq[0] == doctest::Approx((P * P + Q * Q) / u_exact).epsilon(1e-10));
}

TEST_CASE("converged state satisfies the balance equations") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const NetworkModel net = random_radial(seed, 20);
        std::vector<double> p(20), q(20);
        for (int i = 0; i < 20; ++i) {
            p[i] = net.base_demand_p[i][0];
            q[i] = net.base_demand_q[i][0];
        }
        const auto st = sweep_power_flow(net, p, q);
        // nodal balance: parent inflow = load + sum child (flow + loss)
        for (int v = 0; v < net.node_count(); ++v) {
            if (v == net.substation) {
                continue;
            }
            double presid = st.flow_p[net.parent_branch[v]] - p[v];
            double qresid = st.flow_q[net.parent_branch[v]] - q[v];
            for (int cb : net.child_branches[v]) {
                presid -= st.flow_p[cb] + net.branches[cb].resistance * st.curr_sq[cb];
                qresid -= st.flow_q[cb] + net.branches[cb].reactance * st.curr_sq[cb];
            }
            CHECK(std::abs(presid) < 1e-8);
            CHECK(std::abs(qresid) < 1e-8);
        }
        // current definition at equality
        for (int b = 0; b < net.branch_count(); ++b) {
            const int to = net.branches[b].to;
            CHECK(st.curr_sq[b] * st.volt_sq[to] ==
                  doctest::Approx(st.flow_p[b] * st.flow_p[b] + st.flow_q[b] * st.flow_q[b])
                      .epsilon(1e-10));
        }
    }
}

TEST_CASE("voltage collapse raises") {
    const NetworkModel net = two_bus(0.5, 0.5);
    CHECK_THROWS_AS(sweep_power_flow(net, {0.0, 2.0}, {0.0, 1.0}), SolveError);
}

TEST_CASE("multi-period wrapper runs every period") {
    NetworkModel net = two_bus();
    net.periods = 3;
    net.base_demand_p.assign(2, std::vector<double>(3, 0.0));
    net.base_demand_q.assign(2, std::vector<double>(3, 0.0));
    std::vector<std::vector<double>> p = {{0, 0, 0}, {0.05, 0.1, 0.15}};
    std::vector<std::vector<double>> q = {{0, 0, 0}, {0.02, 0.04, 0.06}};
    const auto states = power_flow(net, p, q);
    CHECK(states.size() == 3);
    CHECK(states[0].volt_sq[1] > states[1].volt_sq[1]);
    CHECK(states[1].volt_sq[1] > states[2].volt_sq[1]);
}
