#include "flexopf/flexarea.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace flexopf {

double Ecdf::operator()(double x) const {
    // Index of the last value <= x.
    auto it = std::upper_bound(values.begin(), values.end(), x);
    if (it == values.begin()) {
        return 0.0;
    }
    return cum[static_cast<std::size_t>(it - values.begin()) - 1];
}

Ecdf build_ecdf(std::vector<double> samples, std::vector<double> weights) {
    if (samples.empty()) {
        throw ValidationError("cannot build an eCDF from an empty sample set");
    }
    if (weights.empty()) {
        weights.assign(samples.size(), 1.0 / static_cast<double>(samples.size()));
    }
    if (weights.size() != samples.size()) {
        throw ValidationError("eCDF weights must match the samples");
    }
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });

    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0)) {
        throw ValidationError("eCDF weights must have positive total mass");
    }

    Ecdf f;
    f.values.reserve(samples.size());
    f.cum.reserve(samples.size());
    double running = 0.0;
    for (std::size_t i : order) {
        running += weights[i] / total;
        if (!f.values.empty() && samples[i] == f.values.back()) {
            f.cum.back() = running;
        } else {
            f.values.push_back(samples[i]);
            f.cum.push_back(running);
        }
    }
    f.cum.back() = 1.0;
    return f;
}

double inverse_ecdf(const Ecdf &F, double beta) {
    if (beta < 0.0 || beta > 1.0) {
        throw ValidationError("beta must lie in [0, 1]");
    }
    if (beta == 0.0) {
        return 0.0;
    }
    // Generalized inverse over the nonnegative axis: mismatch power cannot
    // be negative, so sub-zero sample noise never widens or flips the band.
    auto it = std::lower_bound(F.cum.begin(), F.cum.end(), beta);
    const double v =
        it == F.cum.end() ? F.values.back() : F.values[static_cast<std::size_t>(it - F.cum.begin())];
    return std::max(0.0, v);
}

void BetaSpec::validate(double beta) {
    if (beta < 0.0 || beta > 1.0) {
        throw ValidationError("beta must lie in [0, 1]");
    }
}

void BetaSpec::set_override(int pool, int period, double beta) {
    validate(beta);
    overrides_[{pool, period}] = beta;
}

double BetaSpec::at(int pool, int period) const {
    auto it = overrides_.find({pool, period});
    return it == overrides_.end() ? scalar_ : it->second;
}

std::vector<FlexibilityArea> flexibility_areas(const SopfSolution &sol, const BetaSpec &beta,
                                               double s_base_kw) {
    if (sol.pools == 0) {
        return {};
    }
    std::vector<FlexibilityArea> areas;
    areas.reserve(static_cast<std::size_t>(sol.pools) * sol.periods);
    for (int s = 0; s < sol.pools; ++s) {
        for (int t = 0; t < sol.periods; ++t) {
            const Ecdf F = build_ecdf(sol.mismatch[s][t], sol.probabilities);
            FlexibilityArea a;
            a.pool = s;
            a.period = t;
            a.beta = beta.at(s, t);
            a.lower_pu = sol.reserve[s][t];
            a.upper_pu = sol.reserve[s][t] + inverse_ecdf(F, a.beta);
            a.lower_kw = a.lower_pu * s_base_kw;
            a.upper_kw = a.upper_pu * s_base_kw;
            areas.push_back(a);
        }
    }
    return areas;
}

std::string areas_to_csv(const std::vector<FlexibilityArea> &areas,
                         const std::vector<std::string> &pool_ids) {
    std::ostringstream out;
    out.precision(17);
    out << "pool,period,lower_kw,upper_kw,beta\n";
    for (const FlexibilityArea &a : areas) {
        out << pool_ids[a.pool] << ',' << a.period << ',' << a.lower_kw << ',' << a.upper_kw
            << ',' << a.beta << '\n';
    }
    return out.str();
}

std::string areas_to_json(const std::vector<FlexibilityArea> &areas,
                          const std::vector<std::string> &pool_ids) {
    std::ostringstream out;
    out.precision(17);
    out << "[\n";
    for (std::size_t i = 0; i < areas.size(); ++i) {
        const FlexibilityArea &a = areas[i];
        out << "  {\"pool\": \"" << pool_ids[a.pool] << "\", \"period\": " << a.period
            << ", \"beta\": " << a.beta << ", \"lower_kw\": " << a.lower_kw
            << ", \"upper_kw\": " << a.upper_kw << ", \"lower_pu\": " << a.lower_pu
            << ", \"upper_pu\": " << a.upper_pu << "}" << (i + 1 < areas.size() ? "," : "")
            << "\n";
    }
    out << "]\n";
    return out.str();
}

} // namespace flexopf
