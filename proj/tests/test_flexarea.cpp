#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flexopf/flexarea.hpp"
#include "flexopf/scenario.hpp"

using namespace flexopf;

TEST_CASE("ecdf of {1,2,3}") {
    const Ecdf f = build_ecdf({3.0, 1.0, 2.0});
    CHECK(f(0.5) == doctest::Approx(0.0));
    CHECK(f(1.0) == doctest::Approx(1.0 / 3));
    CHECK(f(2.0) == doctest::Approx(2.0 / 3));
    CHECK(f(2.5) == doctest::Approx(2.0 / 3));
    CHECK(f(3.0) == 1.0);
    CHECK(f(99.0) == 1.0);
}

TEST_CASE("all-equal samples form a single step") {
    const Ecdf f = build_ecdf({5.0, 5.0, 5.0});
    CHECK(f.values.size() == 1);
    CHECK(f(4.99) == 0.0);
    CHECK(f(5.0) == 1.0);
}

TEST_CASE("many draws stay a proper step function") {
    std::vector<double> samples;
    for (int i = 0; i < 500; ++i) {
        samples.push_back(rng::uniform01(9, 1, i, 1));
    }
    const Ecdf f = build_ecdf(samples);
    CHECK(f.cum.back() == 1.0);
    CHECK(f.values.size() <= 500);
    for (std::size_t i = 1; i < f.values.size(); ++i) {
        CHECK(f.values[i] > f.values[i - 1]);
        CHECK(f.cum[i] > f.cum[i - 1]);
    }
}

TEST_CASE("general weights shift the quantiles") {
    // Samples {1, 2} with mass 0.9 on the first: the 0.9-quantile is 1.
    const Ecdf f = build_ecdf({1.0, 2.0}, {0.9, 0.1});
    CHECK(f(1.0) == doctest::Approx(0.9));
    CHECK(inverse_ecdf(f, 0.9) == doctest::Approx(1.0));
    CHECK(inverse_ecdf(f, 0.95) == doctest::Approx(2.0));
}

TEST_CASE("inverse ecdf conventions") {
    const Ecdf f = build_ecdf({0.1, 0.4});
    CHECK(inverse_ecdf(f, 0.0) == 0.0); // pinned regardless of samples
    CHECK(inverse_ecdf(f, 1.0) == doctest::Approx(0.4));
    CHECK(inverse_ecdf(f, 0.5) == doctest::Approx(0.1));
    CHECK_THROWS_AS(inverse_ecdf(f, 1.5), ValidationError);
    CHECK_THROWS_AS(inverse_ecdf(f, -0.1), ValidationError);

    const Ecdf g = build_ecdf({0.0, 10.0});
    CHECK(inverse_ecdf(g, 0.5) == doctest::Approx(0.0)); // F(0) = 0.5 >= 0.5
}

TEST_CASE("inverse of a sample's own cumulative stays at or below it") {
    std::vector<double> samples;
    for (int i = 0; i < 100; ++i) {
        samples.push_back(rng::uniform01(13, 2, i, 1) * 7.0);
    }
    const Ecdf f = build_ecdf(samples);
    for (double v : f.values) {
        CHECK(inverse_ecdf(f, f(v)) <= v + 1e-14);
    }
}

namespace {

SopfSolution tiny_solution() {
    SopfSolution sol;
    sol.pools = 1;
    sol.periods = 2;
    sol.scenarios = 4;
    sol.probabilities.assign(4, 0.25);
    sol.reserve = {{0.05, 0.10}};
    sol.mismatch = {{{0.00, 0.01, 0.02, 0.03}, {0.01, 0.01, 0.05, 0.02}}};
    return sol;
}

} // namespace

TEST_CASE("area limits at beta 0 and 1") {
    const SopfSolution sol = tiny_solution();
    const auto a0 = flexibility_areas(sol, BetaSpec(0.0), 1000.0);
    for (const FlexibilityArea &a : a0) {
        CHECK(a.upper_pu == a.lower_pu); // collapses onto the reserve
    }
    const auto a1 = flexibility_areas(sol, BetaSpec(1.0), 1000.0);
    CHECK(a1[0].upper_pu == sol.reserve[0][0] + 0.03);
    CHECK(a1[1].upper_pu == sol.reserve[0][1] + 0.05);
    CHECK(a1[0].upper_kw == doctest::Approx(1000.0 * a1[0].upper_pu));
}

TEST_CASE("upper bound is nondecreasing in beta") {
    const SopfSolution sol = tiny_solution();
    double prev0 = -1, prev1 = -1;
    for (double beta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto areas = flexibility_areas(sol, BetaSpec(beta), 1000.0);
        CHECK(areas[0].upper_pu >= prev0);
        CHECK(areas[1].upper_pu >= prev1);
        prev0 = areas[0].upper_pu;
        prev1 = areas[1].upper_pu;
    }
}

TEST_CASE("per-pool-per-period overrides apply") {
    const SopfSolution sol = tiny_solution();
    BetaSpec beta(1.0);
    beta.set_override(0, 1, 0.0);
    const auto areas = flexibility_areas(sol, beta, 1000.0);
    CHECK(areas[0].beta == 1.0);
    CHECK(areas[1].beta == 0.0);
    CHECK(areas[1].upper_pu == sol.reserve[0][1]);
}

TEST_CASE("csv export carries one row per pool and period") {
    const SopfSolution sol = tiny_solution();
    const auto areas = flexibility_areas(sol, BetaSpec(0.5), 1000.0);
    const std::string csv = areas_to_csv(areas, {"cp1"});
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3); // header + 2 rows
    CHECK(csv.find("cp1,0,") != std::string::npos);
}
