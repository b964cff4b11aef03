#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flexopf/netmodel.hpp"
#include "flexopf/scenario.hpp"

using namespace flexopf;

namespace {

ChargingPoolSpec one_pool(int tasks, double mean_arrival, double rate) {
    ChargingPoolSpec p;
    p.pool_id = "p1";
    p.node_id = "2";
    p.node = 1;
    p.p_max.assign(24, 0.2);
    p.energy_price.assign(24, 0.2);
    p.utility.alpha = {0.0, 100.0};
    p.utility.slope = {1.0};
    p.utility.intercept = {0.0};
    for (int i = 0; i < tasks; ++i) {
        TaskSpec t;
        t.task_id = "t" + std::to_string(i);
        t.mean_arrival = mean_arrival;
        t.mean_duration_rate = rate;
        t.e_min = 0.0;
        t.e_max = 100.0;
        t.x_max = 22.0;
        p.tasks.push_back(t);
    }
    return p;
}

} // namespace

TEST_CASE("equiprobable scenarios") {
    auto set = generate_scenarios({one_pool(3, 10, 0.25)}, 500, 1, 24, 1.0);
    CHECK(set.count == 500);
    for (double pi : set.probabilities) {
        CHECK(pi == doctest::Approx(1.0 / 500));
    }
}

TEST_CASE("energy clips to the deliverable window") {
    // With e_max far above the window capacity every draw is clipped when the
    // window is short; with x_max = 22 and a 2-period window the cap is 44.
    auto set = generate_scenarios({one_pool(50, 5, 0.5)}, 200, 3, 24, 1.0);
    for (int n = 0; n < set.task_count(); ++n) {
        for (int w = 0; w < set.count; ++w) {
            const TaskRealization &r = set.at(n, w);
            CHECK(r.energy <= 22.0 * (r.departure - r.arrival) + 1e-12);
            CHECK(r.arrival < r.departure);
            CHECK(r.departure <= 24);
        }
    }
}

TEST_CASE("fixed seed reproduces byte-identical sets across exec modes") {
    const std::vector<ChargingPoolSpec> pools = {one_pool(7, 9, 0.2), one_pool(5, 18, 0.3)};
    auto a = generate_scenarios(pools, 100, 42, 24, 1.0, ExecMode::Serial);
    auto b = generate_scenarios(pools, 100, 42, 24, 1.0, ExecMode::OpenMP);
    auto c = generate_scenarios(pools, 100, 42, 24, 1.0, ExecMode::OpenMP);
    CHECK(a.to_json() == b.to_json());
    CHECK(b.to_json() == c.to_json());
    CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("different seeds differ") {
    auto a = generate_scenarios({one_pool(5, 9, 0.2)}, 50, 1, 24, 1.0);
    auto b = generate_scenarios({one_pool(5, 9, 0.2)}, 50, 2, 24, 1.0);
    CHECK(a.to_csv() != b.to_csv());
}

TEST_CASE("law of large numbers for the generator") {
    // 1e5 draws: the unclamped arrival mean must sit within 3 standard
    // errors of the Poisson mean (the clamp at horizon-2 never binds for
    // mean 8 over a 24-period horizon in practice; use raw draws).
    const double mean = 8.0;
    const int draws = 100000;
    double arrival_sum = 0.0;
    for (int i = 0; i < draws; ++i) {
        arrival_sum += rng::poisson(mean, 7, 99, i, 1);
    }
    const double sample_mean = arrival_sum / draws;
    CHECK(std::abs(sample_mean - mean) <= 3.0 * std::sqrt(mean / draws));

    const double rate = 0.25;
    double dur_sum = 0.0;
    for (int i = 0; i < draws; ++i) {
        dur_sum += rng::exponential(rate, 7, 98, i, 2);
    }
    const double dur_mean = dur_sum / draws;
    CHECK(std::abs(dur_mean - 1.0 / rate) <= 3.0 * (1.0 / rate) / std::sqrt(draws));
}

TEST_CASE("stats recompute from realizations") {
    SUBCASE("single scenario reproduces the values") {
        auto set = generate_scenarios({one_pool(1, 5, 0.5)}, 1, 11, 24, 1.0);
        set.realizations[0][0] = {2, 5, 30.0};
        auto st = scenario_stats(set);
        CHECK(st.mean_arrival[0] == doctest::Approx(2));
        CHECK(st.mean_duration[0] == doctest::Approx(3));
        CHECK(st.mean_energy[0] == doctest::Approx(30.0));
        CHECK(st.expected_plugged_in[3] == doctest::Approx(1.0));
        CHECK(st.expected_plugged_in[5] == doctest::Approx(0.0));
    }
    SUBCASE("two scenarios average") {
        auto set = generate_scenarios({one_pool(1, 5, 0.5)}, 2, 11, 24, 1.0);
        set.realizations[0][0] = {2, 6, 30.0};
        set.realizations[0][1] = {4, 8, 50.0};
        auto st = scenario_stats(set);
        CHECK(st.mean_arrival[0] == doctest::Approx(3.0));
        CHECK(st.mean_energy[0] == doctest::Approx(40.0));
    }
}

TEST_CASE("full requests clip exactly to the window capacity") {
    ChargingPoolSpec p = one_pool(40, 6, 0.6);
    for (TaskSpec &t : p.tasks) {
        t.e_min = t.e_max = 100.0; // every draw asks for 100 kWh
    }
    auto set = generate_scenarios({p}, 100, 17, 24, 1.0);
    bool saw_two_period_window = false;
    for (int n = 0; n < set.task_count(); ++n) {
        for (int w = 0; w < set.count; ++w) {
            const TaskRealization &r = set.at(n, w);
            const double window = r.departure - r.arrival;
            CHECK(r.energy == doctest::Approx(std::min(100.0, 22.0 * window)));
            if (window == 2) {
                saw_two_period_window = true;
                CHECK(r.energy == doctest::Approx(44.0));
            }
        }
    }
    CHECK(saw_two_period_window);
}

TEST_CASE("bundled pools: plugged-in count peaks inside the day window") {
    const NetworkModel net = load_network(std::string(FLEXOPF_DATA_DIR) + "/network34.json");
    const auto pools = load_pools(std::string(FLEXOPF_DATA_DIR) + "/pools34.json", net);
    const auto set = generate_scenarios(pools, 500, 1, net.periods, net.delta_t);
    const auto st = scenario_stats(set);
    int argmax = 0;
    for (int t = 1; t < net.periods; ++t) {
        if (st.expected_plugged_in[t] > st.expected_plugged_in[argmax]) {
            argmax = t;
        }
    }
    CHECK(argmax >= 8);
    CHECK(argmax <= 20);
}

TEST_CASE("count of zero is rejected") {
    CHECK_THROWS_AS(generate_scenarios({one_pool(1, 5, 0.5)}, 0, 1, 24, 1.0), ValidationError);
}
