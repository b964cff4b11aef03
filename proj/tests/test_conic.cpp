#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flexopf/conic/program.hpp"
#include "flexopf/conic/solver.hpp"
#include "support/oracles.hpp"

using namespace flexopf;
using namespace flexopf::conic;

TEST_CASE("bound-active LP: minimize x subject to x >= 3") {
    ConicProgram prog;
    const int x = prog.add_var(VarKind::Continuous, 3.0, kInf, {});
    prog.add_objective_term(x, 1.0);
    auto [point, report] = solve_socp(prog);
    CHECK(report.status == SolveStatus::Optimal);
    CHECK(point[x] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(report.primal_objective == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(std::abs(report.primal_objective - report.dual_objective) < 1e-6);
}

TEST_CASE("equality and inequality rows") {
    // min x + y  s.t.  x + y >= 2, x - y = 0.5
    ConicProgram prog;
    const int x = prog.add_var(VarKind::Continuous, -kInf, kInf, {});
    const int y = prog.add_var(VarKind::Continuous, -kInf, kInf, {});
    prog.add_ineq({{{x, -1.0}, {y, -1.0}}, -2.0, "lb"});
    prog.add_eq({{{x, -1.0}, {y, 1.0}}, -0.5, "tie"});
    prog.add_objective_term(x, 1.0);
    prog.add_objective_term(y, 1.0);
    auto [point, report] = solve_socp(prog);
    CHECK(report.status == SolveStatus::Optimal);
    CHECK(point[x] == doctest::Approx(1.25).epsilon(1e-7));
    CHECK(point[y] == doctest::Approx(0.75).epsilon(1e-7));
}

TEST_CASE("rotated cone: v = 1, i = t, p = 2 gives t = 4") {
    ConicProgram prog;
    const int v = prog.add_var(VarKind::Continuous, 1.0, 1.0, {});
    const int i = prog.add_var(VarKind::Continuous, 0.0, kInf, {});
    const int p = prog.add_var(VarKind::Continuous, 2.0, 2.0, {});
    const int q = prog.add_var(VarKind::Continuous, 0.0, 0.0, {});
    RotatedCone cone;
    cone.v = v;
    cone.i = i;
    cone.p = p;
    cone.q = q;
    prog.add_rcone(cone);
    prog.add_objective_term(i, 1.0);
    auto [point, report] = solve_socp(prog);
    CHECK(report.status == SolveStatus::Optimal);
    CHECK(point[i] == doctest::Approx(4.0).epsilon(1e-7));
}

TEST_CASE("solve_socp rejects unfixed binaries") {
    ConicProgram prog;
    const int y = prog.add_var(VarKind::Binary, 0.0, 1.0, {});
    prog.add_objective_term(y, 1.0);
    CHECK_THROWS_AS(solve_socp(prog), SolveError);
    // fixed by bounds is fine
    prog.vars()[y].lb = prog.vars()[y].ub = 1.0;
    auto [point, report] = solve_socp(prog);
    CHECK(report.primal_objective == doctest::Approx(1.0));
}

TEST_CASE("infeasible program is certified") {
    ConicProgram prog;
    const int x = prog.add_var(VarKind::Continuous, 0.0, 1.0, {});
    prog.add_eq({{{x, 1.0}}, 2.0, "impossible"});
    prog.add_objective_term(x, 1.0);
    CHECK_THROWS_AS(solve_socp(prog), SolveError);
    auto [point, report] = solve_socp(prog, {}, false);
    CHECK(report.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded program is certified") {
    ConicProgram prog;
    const int x = prog.add_var(VarKind::Continuous, -kInf, 0.0, {});
    prog.add_objective_term(x, 1.0);
    auto [point, report] = solve_socp(prog, {}, false);
    CHECK(report.status == SolveStatus::Unbounded);
}

TEST_CASE("two-bus branch flow matches the closed-form root") {
    // Substation at V^2 = 1 feeding one branch (R = X = 0.05) into a load of
    // 0.1 + j0.05. Receiving-end flows are the load itself, so
    //   u = 1 - 2(R P + X Q) - (R^2 + X^2)(P^2 + Q^2)/u
    // gives a quadratic in u = V2^2; the high-voltage root is the operating
    // point. Minimizing losses (the current) makes the relaxation tight.
    const double R = 0.05, X = 0.05, P = 0.1, Q = 0.05;
    const double bcoef = 1.0 - 2.0 * (R * P + X * Q);
    const double c = (R * R + X * X) * (P * P + Q * Q);
    const double u_exact = 0.5 * (bcoef + std::sqrt(bcoef * bcoef - 4.0 * c));
    const double isq_exact = (P * P + Q * Q) / u_exact;

    ConicProgram prog;
    const int u = prog.add_var(VarKind::Continuous, 0.25, 1.21, {});
    const int isq = prog.add_var(VarKind::Continuous, 0.0, 10.0, {});
    const int pf = prog.add_var(VarKind::Continuous, P, P, {});
    const int qf = prog.add_var(VarKind::Continuous, Q, Q, {});
    // voltage drop row: u + 2 R P + 2 X Q + (R^2+X^2) isq = 1
    prog.add_eq({{{u, 1.0}, {pf, 2.0 * R}, {qf, 2.0 * X}, {isq, R * R + X * X}}, 1.0, "vdrop"});
    RotatedCone cone;
    cone.v = u;
    cone.i = isq;
    cone.p = pf;
    cone.q = qf;
    prog.add_rcone(cone);
    prog.add_objective_term(isq, R); // loss minimization tightens the cone
    conic::SolverOptions opts;
    opts.feas_tol = 1e-9;
    opts.gap_tol = 1e-9;
    opts.rel_gap_tol = 1e-9;
    auto [point, report] = solve_socp(prog, opts);
    CHECK(report.status == SolveStatus::Optimal);
    CHECK(point[u] == doctest::Approx(u_exact).epsilon(1e-7));
    CHECK(point[isq] == doctest::Approx(isq_exact).epsilon(1e-7));
}

TEST_CASE("branch and bound: integral relaxation needs one node") {
    // One binary whose relaxation is already integral: y appears with a
    // positive cost, so the relaxation drives it to its bound.
    ConicProgram prog;
    const int x = prog.add_var(VarKind::Continuous, 0.0, kInf, {});
    VarMeta m;
    m.role = VarRole::Segment;
    m.pool = 0;
    m.scenario = 0;
    const int y = prog.add_var(VarKind::Binary, 0.0, 1.0, m);
    prog.add_ineq({{{x, -1.0}, {y, -1.0}}, -1.0, "cover"}); // x + y >= 1
    prog.add_objective_term(x, 1.0);
    prog.add_objective_term(y, 2.0);
    auto [point, report] = solve_misocp(prog);
    CHECK(report.status == SolveStatus::Optimal);
    CHECK(report.bb_nodes == 1);
    CHECK(report.bound_gap <= 1e-9);
    CHECK(point[y] == doctest::Approx(0.0));
    CHECK(report.primal_objective == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("exact search equals exhaustive enumeration on a nonconvex utility") {
    // 4-binary toy: one pool, one scenario, nonconvex 4-segment utility with
    // phi free in a band. Enumerate the segment choices by fixing binaries.
    UtilityFunction u;
    u.alpha = {0.0, 2.0, 5.0, 9.0, 14.0};
    u.slope = {3.0, 0.5, 4.0, 1.0};
    u.intercept = {0.0, 5.0, -12.5, 14.5};
    const UtilityEncoding enc = encode_utility(u);

    // phi forced into [4, 14] by a linear row; minimize cost + 0.3 phi.
    auto build = [&](double fix_y_to, int which) {
        ConicProgram prog;
        std::vector<int> cols(enc.num_cols);
        cols[enc.col_phi] = prog.add_var(VarKind::Continuous, 4.0, 14.0, {});
        cols[enc.col_cost] = prog.add_var(VarKind::Continuous, -kInf, kInf, {});
        for (int c : enc.col_lam_lo) {
            cols[c] = prog.add_var(VarKind::Continuous, 0.0, kInf, {});
        }
        for (int c : enc.col_lam_hi) {
            cols[c] = prog.add_var(VarKind::Continuous, 0.0, kInf, {});
        }
        for (std::size_t k = 0; k < enc.col_y.size(); ++k) {
            VarMeta m;
            m.role = VarRole::Segment;
            m.pool = 0;
            m.scenario = 0;
            m.segment = static_cast<int>(k) + 1;
            double lb = 0.0, ub = 1.0;
            if (which >= 0) {
                lb = ub = (static_cast<int>(k) == which ? fix_y_to : 0.0);
            }
            cols[enc.col_y[k]] = prog.add_var(VarKind::Binary, lb, ub, m);
        }
        for (const UtilityEncoding::Row &row : enc.rows) {
            LinearRow lr;
            lr.label = "util_" + row.tag;
            lr.rhs = row.rhs;
            for (auto [col, coeff] : row.coeffs) {
                lr.terms.push_back({cols[col], coeff});
            }
            row.is_eq ? prog.add_eq(std::move(lr)) : prog.add_ineq(std::move(lr));
        }
        prog.add_objective_term(cols[enc.col_cost], 1.0);
        prog.add_objective_term(cols[enc.col_phi], 0.3);
        return prog;
    };

    // Enumeration oracle over the five segment choices (none or k).
    double best = std::numeric_limits<double>::infinity();
    for (int choice = -1; choice < 4; ++choice) {
        ConicProgram prog = choice < 0 ? build(0.0, -2) : build(1.0, choice);
        if (choice < 0) {
            // all-off: fix every binary to zero
            for (auto &v : prog.vars()) {
                if (v.kind == VarKind::Binary) {
                    v.lb = v.ub = 0.0;
                }
            }
        }
        auto [point, report] = solve_socp(prog, {}, false);
        if (report.status == SolveStatus::Optimal) {
            best = std::min(best, report.primal_objective);
        }
    }

    auto [point, report] = solve_misocp(build(0.0, -1));
    CHECK(report.status == SolveStatus::Optimal);
    CHECK(report.primal_objective == doctest::Approx(best).epsilon(1e-6));
    CHECK(report.bb_nodes >= 1);
    // the incumbent can never undercut the proven bound
    CHECK(report.primal_objective >= report.best_bound - 1e-9);
}

TEST_CASE("deterministic reports across repeated solves") {
    const UtilityFunction u = test::random_utility(5);
    const UtilityEncoding enc = encode_utility(u);
    auto prog = test::encoding_program(enc, u.domain_max() * 0.37);
    auto [p1, r1] = solve_misocp(prog);
    auto [p2, r2] = solve_misocp(prog);
    CHECK(p1 == p2);
    CHECK(r1.to_json() == r2.to_json());
}

TEST_CASE("program dump is stable and complete") {
    ConicProgram prog;
    const int x = prog.add_var(VarKind::Continuous, 0.0, 2.0, {});
    prog.add_objective_term(x, 1.5);
    prog.add_eq({{{x, 1.0}}, 1.0, "fix"});
    const std::string d1 = prog.dump();
    const std::string d2 = prog.dump();
    CHECK(d1 == d2);
    CHECK(d1.find("conicprogram v1") == 0);
    CHECK(d1.find("fix") != std::string::npos);
    CHECK(d1.find("min:") != std::string::npos);
}
