#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flexopf/common.hpp"

namespace flexopf {

/// Lower-semicontinuous piecewise-linear cost of energy not served.
///
/// Segment k (1-based) is the affine map slope[k-1]*phi + intercept[k-1] on
/// the half-open interval (alpha[k-1], alpha[k]]; the value at phi = 0 is 0.
/// Segments may be discontinuous at breakpoints, which is what makes the
/// conic encoding need binaries in general.
struct UtilityFunction {
    std::vector<double> alpha;     ///< breakpoints, alpha[0] == 0, strictly increasing
    std::vector<double> slope;     ///< per segment, currency/kWh
    std::vector<double> intercept; ///< per segment, currency

    int segments() const { return static_cast<int>(slope.size()); }
    double domain_max() const { return alpha.back(); }

    /// Value of segment k (1-based) at phi, ignoring interval membership.
    double segment_value(int k, double phi) const {
        return slope[k - 1] * phi + intercept[k - 1];
    }
    /// Segment k's value at its own right endpoint alpha[k].
    double endpoint_lo(int k) const { return k == 0 ? 0.0 : segment_value(k, alpha[k]); }
    /// Segment k+1's value at its left endpoint alpha[k].
    double endpoint_hi(int k) const { return segment_value(k + 1, alpha[k]); }

    void check(const std::string &label = "utility") const;
};

/// Evaluates the utility exactly as written: 0 at phi = 0, the owning
/// segment's affine value otherwise. Throws on phi outside [0, alpha_max].
double evaluate_utility(const UtilityFunction &u, double phi);

/// True when the binaries of the conic encoding can be dropped without
/// changing any minimizer: slopes nondecreasing, no jumps at any breakpoint
/// (including the origin) and the function nondecreasing. Upward jumps also
/// disqualify: without binaries the multipliers could cut below them.
bool is_convex_shortcut_eligible(const UtilityFunction &u, double tol = 1e-9);

/// The mixed-binary linear encoding of a utility function: multipliers for
/// both endpoints of every segment, one activation binary per segment, and
/// linear rows tying them to the energy-not-served and cost columns.
///
/// Columns are local ids; the program builder maps them onto its own
/// variable table, tests can instantiate the block standalone.
struct UtilityEncoding {
    struct Row {
        std::vector<std::pair<int, double>> coeffs;
        double rhs = 0.0;
        bool is_eq = true;
        std::string tag;
    };

    int kappa = 0;
    int col_phi = 0;
    int col_cost = 1;
    std::vector<int> col_lam_lo; ///< k = 0..kappa, lower-endpoint weights
    std::vector<int> col_lam_hi; ///< k = 0..kappa-1, upper-endpoint weights
    std::vector<int> col_y;      ///< k = 1..kappa, segment binaries
    int num_cols = 0;

    std::vector<double> endpoint_lo; ///< value at alpha[k] of segment k; 0 for k = 0
    std::vector<double> endpoint_hi; ///< value at alpha[k] of segment k+1
    std::vector<Row> rows;
};

UtilityEncoding encode_utility(const UtilityFunction &u);

} // namespace flexopf
