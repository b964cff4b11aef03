#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <cmath>
#include <limits>
#include <vector>

#include "flexopf/conic/program.hpp"
#include "flexopf/conic/solver.hpp"
#include "flexopf/scenario.hpp"
#include "flexopf/utility.hpp"

namespace flexopf::test {

/// Minimum encoded cost at a fixed energy-not-served value, by direct
/// enumeration of the segment choices: the all-off choice is feasible only
/// at phi = 0 (cost 0); segment k admits phi in [alpha_{k-1}, alpha_k] and
/// costs the interpolation of its endpoint values, which is the segment's
/// own affine map.
inline double utility_min_cost_oracle(const UtilityFunction &u, double phi) {
    double best = std::numeric_limits<double>::infinity();
    if (phi == 0.0) {
        best = 0.0;
    }
    for (int k = 1; k <= u.segments(); ++k) {
        const double eps = 1e-12 * std::max(1.0, u.alpha[k]);
        if (phi >= u.alpha[k - 1] - eps && phi <= u.alpha[k] + eps) {
            const double lo = u.alpha[k - 1];
            const double hi = u.alpha[k];
            const double w = (phi - lo) / (hi - lo);
            const double value = (1.0 - w) * u.endpoint_hi(k - 1) + w * u.endpoint_lo(k);
            best = std::min(best, value);
        }
    }
    return best;
}

/// Random piecewise-linear utility with up to `max_kappa` segments; jumps
/// and slope reversals appear with sizeable probability so the binaries
/// matter.
inline UtilityFunction random_utility(std::uint64_t seed, int max_kappa = 4) {
    auto u01 = [&](std::uint64_t field) { return rng::uniform01(seed, 0xabcdef, 0, field); };
    UtilityFunction u;
    const int kappa = 1 + static_cast<int>(u01(1) * max_kappa) % max_kappa;
    u.alpha.push_back(0.0);
    double a = 0.0;
    for (int k = 1; k <= kappa; ++k) {
        a += 0.5 + 10.0 * u01(10 + k);
        u.alpha.push_back(a);
    }
    double value_at_left = 0.0;
    for (int k = 1; k <= kappa; ++k) {
        const double slope = -1.0 + 6.0 * u01(100 + k);
        double jump = 0.0;
        if (u01(200 + k) < 0.4) { // discontinuity at the left breakpoint
            jump = -3.0 + 8.0 * u01(300 + k);
        }
        const double left_value = value_at_left + jump;
        const double intercept = left_value - slope * u.alpha[k - 1];
        u.slope.push_back(slope);
        u.intercept.push_back(intercept);
        value_at_left = slope * u.alpha[k] + intercept;
    }
    return u;
}

/// Standalone program for one utility encoding: minimize the cost column
/// with the energy column pinned to `phi`.
inline conic::ConicProgram encoding_program(const UtilityEncoding &enc, double phi) {
    using namespace conic;
    ConicProgram prog;
    std::vector<int> cols(enc.num_cols, -1);
    cols[enc.col_phi] = prog.add_var(VarKind::Continuous, phi, phi, {});
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
        cols[enc.col_y[k]] = prog.add_var(VarKind::Binary, 0.0, 1.0, m);
    }
    for (const UtilityEncoding::Row &row : enc.rows) {
        LinearRow lr;
        lr.label = "util_" + row.tag;
        lr.rhs = row.rhs;
        for (auto [col, coeff] : row.coeffs) {
            lr.terms.push_back({cols[col], coeff});
        }
        if (row.is_eq) {
            prog.add_eq(std::move(lr));
        } else {
            prog.add_ineq(std::move(lr));
        }
    }
    prog.add_objective_term(cols[enc.col_cost], 1.0);
    return prog;
}

} // namespace flexopf::test
