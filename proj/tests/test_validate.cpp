#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flexopf/pipeline.hpp"
#include "flexopf/validate.hpp"
#include "support/fixtures.hpp"

using namespace flexopf;
using test::small_network;
using test::small_pool;

namespace {

struct SolvedFixture {
    NetworkModel net;
    std::vector<ChargingPoolSpec> pools;
    ScenarioSet scens;
    PlanOutputs plan;

    SolvedFixture() {
        net = small_network(3, 3, 0.04, 0.04, 0.8);
        net.v_min = 0.93;
        net.base_demand_p[1] = {0.08, 0.12, 0.06};
        net.base_demand_q[1] = {0.04, 0.06, 0.03};
        net.base_demand_p[2] = {0.06, 0.10, 0.05};
        net.base_demand_q[2] = {0.03, 0.05, 0.02};
        pools = {small_pool(net, "3", 3)};
        scens = generate_scenarios(pools, 6, 21, 3, 1.0);
        plan = solve_plan(net, pools, scens, {}, {}, true);
    }
};

} // namespace

TEST_CASE("restoration makes every cone tight and keeps limits") {
    SolvedFixture f;
    CHECK(f.plan.tighten.applied);
    CHECK(f.plan.exactness.max_gap <= 1e-8);
    CHECK(f.plan.exactness.gaps_above_tol.empty());
    CHECK(f.plan.exactness.binding_upper_voltage.empty());
}

TEST_CASE("exact solution slices match the sweep fixed point") {
    // The oracle-equivalence property: rebuild each (t, w) injection set and
    // compare the stored network state against an independent sweep.
    SolvedFixture f;
    for (int t = 0; t < f.plan.solution.periods; ++t) {
        for (int w = 0; w < f.plan.solution.scenarios; ++w) {
            std::vector<double> p_inj(f.net.node_count()), q_inj(f.net.node_count());
            for (int v = 0; v < f.net.node_count(); ++v) {
                p_inj[v] = f.net.base_demand_p[v][t];
                q_inj[v] = f.net.base_demand_q[v][t];
            }
            p_inj[f.pools[0].node] += f.plan.solution.pool_draw(0, t, w);
            const PowerFlowState st = sweep_power_flow(f.net, p_inj, q_inj);
            for (int v = 0; v < f.net.node_count(); ++v) {
                CHECK(st.volt_sq[v] ==
                      doctest::Approx(f.plan.solution.volt_sq[v][t][w]).epsilon(1e-6));
            }
            for (int b = 0; b < f.net.branch_count(); ++b) {
                CHECK(st.curr_sq[b] ==
                      doctest::Approx(f.plan.solution.curr_sq[b][t][w]).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("beta 0 areas validate with zero violations") {
    SolvedFixture f;
    const auto areas = flexibility_areas(f.plan.solution, BetaSpec(0.0), f.net.s_base_kw());
    const ValidationReport rep = mc_validate(f.net, f.pools, areas, 200, 5);
    CHECK(rep.failed_sims == 0);
    CHECK(rep.violation_freq == 0.0);
    CHECK(rep.voltage_violation_freq == 0.0);
    CHECK(rep.current_violation_freq == 0.0);
}

TEST_CASE("validation is deterministic across runs and exec modes") {
    SolvedFixture f;
    const auto areas = flexibility_areas(f.plan.solution, BetaSpec(0.8), f.net.s_base_kw());
    const ValidationReport a = mc_validate(f.net, f.pools, areas, 300, 5, ExecMode::Serial);
    const ValidationReport b = mc_validate(f.net, f.pools, areas, 300, 5, ExecMode::OpenMP);
    const ValidationReport c = mc_validate(f.net, f.pools, areas, 300, 5, ExecMode::OpenMP);
    CHECK(a.to_json() == b.to_json());
    CHECK(b.to_json() == c.to_json());
    CHECK(a.traces_to_csv() == b.traces_to_csv());
}

TEST_CASE("missing area coverage is rejected") {
    SolvedFixture f;
    auto areas = flexibility_areas(f.plan.solution, BetaSpec(0.5), f.net.s_base_kw());
    areas.pop_back();
    CHECK_THROWS_AS(mc_validate(f.net, f.pools, areas, 10, 1), ValidationError);
}

TEST_CASE("payment equals revenue when nothing is curtailed") {
    NetworkModel net = small_network(3, 2, 0.01, 0.01, 3.0);
    std::vector<ChargingPoolSpec> pools = {small_pool(net, "2", 1)};
    ScenarioSet scens;
    scens.count = 1;
    scens.horizon = 3;
    scens.delta_t = 1.0;
    scens.probabilities = {1.0};
    TaskRef ref;
    ref.pool = 0;
    ref.task = 0;
    ref.pool_id = pools[0].pool_id;
    ref.task_id = "t1";
    ref.x_max = 22.0;
    scens.tasks = {ref};
    scens.realizations = {{{0, 3, 10.0}}}; // 10 kWh, plenty of room
    PlanOutputs plan = solve_plan(net, pools, scens, {}, {}, true);
    REQUIRE(plan.solution.pool_shortfall[0][0] < 1e-7);
    const PaymentReport rep =
        payment_analysis(pools, scens, plan.solution, net.s_base_kw(), net.delta_t);
    // 10 kWh at 0.2 currency/kWh
    CHECK(rep.revenue[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rep.total[0] == doctest::Approx(rep.revenue[0] - rep.cost[0]));
    CHECK(rep.cost[0] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("payment subtracts the utility cost of a known shortfall") {
    SolvedFixture f;
    SopfSolution sol = f.plan.solution;
    // Hand-set a shortfall at the first breakpoint in scenario 0.
    const double alpha1 = f.pools[0].utility.alpha[1];
    sol.pool_shortfall[0][0] = alpha1;
    const PaymentReport rep =
        payment_analysis(f.pools, f.scens, sol, f.net.s_base_kw(), f.net.delta_t);
    const double f1 = evaluate_utility(f.pools[0].utility, alpha1);
    CHECK(rep.cost[0] == doctest::Approx(f1).epsilon(1e-9));
    CHECK(rep.total[0] == doctest::Approx(rep.revenue[0] - f1).epsilon(1e-9));
}

TEST_CASE("power flow failures are counted and skipped") {
    // An absurd band forces voltage collapse in every draw.
    NetworkModel net = small_network(1, 2, 0.5, 0.5, 99.0);
    std::vector<ChargingPoolSpec> pools = {small_pool(net, "2", 1)};
    std::vector<FlexibilityArea> areas(1);
    areas[0].pool = 0;
    areas[0].period = 0;
    areas[0].beta = 1.0;
    areas[0].lower_pu = 3.0;
    areas[0].upper_pu = 3.0;
    CHECK_THROWS_AS(mc_validate(net, pools, areas, 5, 1), SolveError);
}
