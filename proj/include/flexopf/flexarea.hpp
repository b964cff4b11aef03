#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flexopf/sopf.hpp"

namespace flexopf {

/// Empirical step CDF over weighted samples.
struct Ecdf {
    std::vector<double> values; ///< sorted nondecreasing
    std::vector<double> cum;    ///< cumulative probability per value, last = 1

    /// F(x): probability mass of samples <= x.
    double operator()(double x) const;
    double max_sample() const { return values.back(); }
};

/// Builds the eCDF; weights default to uniform and are normalized.
Ecdf build_ecdf(std::vector<double> samples, std::vector<double> weights = {});

/// Generalized inverse inf{v >= 0 : F(v) >= beta}; beta = 0 is pinned to 0
/// (band collapses onto the reserve) and beta = 1 returns the largest
/// sample. Throws on beta outside [0, 1].
double inverse_ecdf(const Ecdf &F, double beta);

/// Scalar risk level with optional per-(pool, period) overrides.
class BetaSpec {
  public:
    BetaSpec() = default;
    explicit BetaSpec(double scalar) : scalar_(scalar) { validate(scalar_); }
    void set_override(int pool, int period, double beta);
    double at(int pool, int period) const;
    double scalar() const { return scalar_; }

  private:
    static void validate(double beta);
    double scalar_ = 0.9;
    std::map<std::pair<int, int>, double> overrides_;
};

/// Power band [reserve, reserve + quantile of the mismatch] per pool and
/// period; the artifact the operator communicates to each pool.
struct FlexibilityArea {
    int pool = 0;
    int period = 0;
    double beta = 0.0;
    double lower_pu = 0.0;
    double upper_pu = 0.0;
    double lower_kw = 0.0;
    double upper_kw = 0.0;
};

std::vector<FlexibilityArea> flexibility_areas(const SopfSolution &solution, const BetaSpec &beta,
                                               double s_base_kw);

std::string areas_to_csv(const std::vector<FlexibilityArea> &areas,
                         const std::vector<std::string> &pool_ids);
std::string areas_to_json(const std::vector<FlexibilityArea> &areas,
                          const std::vector<std::string> &pool_ids);

} // namespace flexopf
