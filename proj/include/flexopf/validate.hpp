#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flexopf/flexarea.hpp"
#include "flexopf/powerflow.hpp"
#include "flexopf/sopf.hpp"

namespace flexopf {

/// Outcome of replacing a solved point's network state by the power-flow
/// fixed point of its pool draws. The swept state is exact in the cones by
/// construction; it is only kept when it respects the program bounds, which
/// is guaranteed while the relaxation's exactness conditions hold.
struct TightenResult {
    bool applied = false;
    double raw_max_cone_slack = 0.0;    ///< looseness before the sweep
    double swept_bound_violation = 0.0; ///< worst bound breach of the swept state
    int worst_var = -1;                 ///< program variable of the worst breach
};

TightenResult tighten_network_state(const NetworkModel &net,
                                    const std::vector<ChargingPoolSpec> &pools,
                                    const conic::ConicProgram &program,
                                    std::vector<double> &point, double bound_tol = 1e-7,
                                    ExecMode mode = ExecMode::OpenMP);

/// Monte-Carlo probabilistic power-flow validation of a set of flexibility
/// areas: pool draws are sampled uniformly inside their band, limits are not
/// enforced in the flow, extremes and violation frequencies are recorded.
struct ValidationReport {
    int sims = 0;
    std::uint64_t seed = 0;
    int failed_sims = 0;

    std::vector<double> mean_min_v, lo_min_v, hi_min_v;             ///< per period, pu
    std::vector<double> mean_max_i_amp, lo_max_i_amp, hi_max_i_amp; ///< per period, A
    std::vector<double> per_period_violation_freq;

    std::vector<double> sim_min_v;     ///< all-period minimum voltage per sim
    std::vector<double> sim_max_i_rel; ///< all-period max current / its cap per sim

    double violation_freq = 0.0; ///< any period, either limit
    double voltage_violation_freq = 0.0;
    double current_violation_freq = 0.0;

    std::string to_json() const;
    std::string traces_to_csv() const;
    std::string ecdf_to_csv() const;
};

ValidationReport mc_validate(const NetworkModel &net,
                             const std::vector<ChargingPoolSpec> &pools,
                             const std::vector<FlexibilityArea> &areas, int sims,
                             std::uint64_t seed, ExecMode mode = ExecMode::OpenMP);

/// Per-scenario pool payments: delivered-energy revenue minus the utility
/// cost of the energy not served.
struct PaymentReport {
    std::vector<double> revenue; ///< per scenario, currency
    std::vector<double> cost;    ///< per scenario, currency
    std::vector<double> total;   ///< revenue - cost
    double median = 0.0;
    double quartile_lo = 0.0, quartile_hi = 0.0;
    double p5 = 0.0, p95 = 0.0;

    std::string to_json() const;
};

PaymentReport payment_analysis(const std::vector<ChargingPoolSpec> &pools,
                               const ScenarioSet &scens, const SopfSolution &solution,
                               double s_base_kw, double delta_t);

} // namespace flexopf
