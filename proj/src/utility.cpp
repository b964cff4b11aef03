#include "flexopf/utility.hpp"

#include <cmath>
#include <sstream>

namespace flexopf {

void UtilityFunction::check(const std::string &label) const {
    if (segments() < 1) {
        throw ValidationError(label + ": needs at least one segment");
    }
    if (alpha.size() != slope.size() + 1 || slope.size() != intercept.size()) {
        throw ValidationError(label + ": alpha must have one more entry than slopes/intercepts");
    }
    if (alpha.front() != 0.0) {
        throw ValidationError(label + ": alpha[0] must be 0");
    }
    for (std::size_t k = 1; k < alpha.size(); ++k) {
        if (!(alpha[k] > alpha[k - 1])) {
            throw ValidationError(label + ": breakpoints must be strictly increasing");
        }
    }
    for (int k = 1; k <= segments(); ++k) {
        if (!std::isfinite(endpoint_lo(k)) || !std::isfinite(endpoint_hi(k - 1))) {
            throw ValidationError(label + ": endpoint values must be finite");
        }
    }
}

double evaluate_utility(const UtilityFunction &u, double phi) {
    if (phi < 0.0 || phi > u.domain_max()) {
        std::ostringstream msg;
        msg << "energy not served " << phi << " outside utility domain [0, " << u.domain_max()
            << "]";
        throw ValidationError(msg.str());
    }
    if (phi == 0.0) {
        return 0.0;
    }
    // Segment k owns (alpha[k-1], alpha[k]].
    for (int k = 1; k <= u.segments(); ++k) {
        if (phi <= u.alpha[k]) {
            return u.segment_value(k, phi);
        }
    }
    return u.segment_value(u.segments(), phi); // unreachable; phi <= domain_max
}

bool is_convex_shortcut_eligible(const UtilityFunction &u, double tol) {
    // Continuity at the origin: segment 1 must start at value ~0.
    if (std::abs(u.intercept[0]) > tol) {
        return false;
    }
    // Nondecreasing function needs a nonnegative first slope.
    if (u.slope[0] < -tol) {
        return false;
    }
    for (int k = 1; k < u.segments(); ++k) {
        if (u.slope[k] < u.slope[k - 1] - tol) {
            return false; // slope decrease breaks epigraph convexity
        }
        if (std::abs(u.endpoint_hi(k) - u.endpoint_lo(k)) > tol) {
            return false; // any jump invalidates dropping the binaries
        }
    }
    return true;
}

UtilityEncoding encode_utility(const UtilityFunction &u) {
    u.check();
    const int kappa = u.segments();

    UtilityEncoding e;
    e.kappa = kappa;
    int next = 2; // 0 = phi, 1 = cost
    e.col_lam_lo.resize(kappa + 1);
    e.col_lam_hi.resize(kappa);
    e.col_y.resize(kappa);
    for (int k = 0; k <= kappa; ++k) {
        e.col_lam_lo[k] = next++;
    }
    for (int k = 0; k < kappa; ++k) {
        e.col_lam_hi[k] = next++;
    }
    for (int k = 0; k < kappa; ++k) {
        e.col_y[k] = next++;
    }
    e.num_cols = next;

    e.endpoint_lo.resize(kappa + 1);
    e.endpoint_hi.resize(kappa);
    for (int k = 0; k <= kappa; ++k) {
        e.endpoint_lo[k] = u.endpoint_lo(k);
    }
    for (int k = 0; k < kappa; ++k) {
        e.endpoint_hi[k] = u.endpoint_hi(k);
    }

    // cost = sum_k<kappa (lam_lo[k] u_lo[k] + lam_hi[k] u_hi[k]) + lam_lo[kappa] u_lo[kappa]
    UtilityEncoding::Row cost;
    cost.tag = "cost_combination";
    cost.coeffs.push_back({e.col_cost, 1.0});
    for (int k = 0; k < kappa; ++k) {
        if (e.endpoint_lo[k] != 0.0) {
            cost.coeffs.push_back({e.col_lam_lo[k], -e.endpoint_lo[k]});
        }
        if (e.endpoint_hi[k] != 0.0) {
            cost.coeffs.push_back({e.col_lam_hi[k], -e.endpoint_hi[k]});
        }
    }
    if (e.endpoint_lo[kappa] != 0.0) {
        cost.coeffs.push_back({e.col_lam_lo[kappa], -e.endpoint_lo[kappa]});
    }
    e.rows.push_back(cost);

    // phi = sum_k<kappa (lam_lo[k] + lam_hi[k]) alpha[k] + lam_lo[kappa] alpha[kappa]
    UtilityEncoding::Row rep;
    rep.tag = "phi_combination";
    rep.coeffs.push_back({e.col_phi, 1.0});
    for (int k = 1; k < kappa; ++k) { // alpha[0] = 0 contributes nothing
        rep.coeffs.push_back({e.col_lam_lo[k], -u.alpha[k]});
        rep.coeffs.push_back({e.col_lam_hi[k], -u.alpha[k]});
    }
    rep.coeffs.push_back({e.col_lam_lo[kappa], -u.alpha[kappa]});
    e.rows.push_back(rep);

    // sum of all multipliers = 1
    UtilityEncoding::Row conv;
    conv.tag = "weights_sum";
    conv.rhs = 1.0;
    for (int k = 0; k < kappa; ++k) {
        conv.coeffs.push_back({e.col_lam_lo[k], 1.0});
        conv.coeffs.push_back({e.col_lam_hi[k], 1.0});
    }
    conv.coeffs.push_back({e.col_lam_lo[kappa], 1.0});
    e.rows.push_back(conv);

    // lam_hi[k] + lam_lo[k+1] = y[k+1]: weights live only in the active segment
    for (int k = 0; k < kappa; ++k) {
        UtilityEncoding::Row link;
        link.tag = "segment_link_" + std::to_string(k + 1);
        link.coeffs.push_back({e.col_lam_hi[k], 1.0});
        link.coeffs.push_back({e.col_lam_lo[k + 1], 1.0});
        link.coeffs.push_back({e.col_y[k], -1.0});
        e.rows.push_back(link);
    }

    // at most one active segment
    UtilityEncoding::Row sos;
    sos.tag = "one_segment";
    sos.is_eq = false;
    sos.rhs = 1.0;
    for (int k = 0; k < kappa; ++k) {
        sos.coeffs.push_back({e.col_y[k], 1.0});
    }
    e.rows.push_back(sos);

    return e;
}

} // namespace flexopf
