#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flexopf/pools.hpp"

namespace flexopf {

/// Counter-based pseudo-random draws: every value is a pure function of
/// (seed, stream, index, field), so results never depend on generation order
/// or thread count. The mixer is SplitMix64's finalizer applied to the
/// chained key words.
namespace rng {

std::uint64_t mix64(std::uint64_t x);
std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                  std::uint64_t field);
/// Uniform in [0, 1) with 53 random bits.
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                 std::uint64_t field);
double uniform(double lo, double hi, std::uint64_t seed, std::uint64_t stream,
               std::uint64_t index, std::uint64_t field);
/// Inverse-CDF exponential with the given rate (mean 1/rate).
double exponential(double rate, std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                   std::uint64_t field);
/// Inverse-CDF Poisson; walks the cumulative distribution, fine for the
/// day-ahead means used here (< ~50).
int poisson(double mean, std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
            std::uint64_t field);

} // namespace rng

/// One realized charging session. The departure period is exclusive: the
/// task may draw power in periods [arrival, departure).
struct TaskRealization {
    int arrival = 0;
    int departure = 1;
    double energy = 0.0; ///< kWh
};

/// Identifies a task inside the flattened task list of a scenario set.
struct TaskRef {
    int pool = 0; ///< index into the pool list
    int task = 0; ///< index inside the pool
    std::string pool_id;
    std::string task_id;
    double x_max = 0.0; ///< kW, copied for feasibility checks
};

struct ScenarioSet {
    int count = 0;
    std::uint64_t seed = 0;
    int horizon = 0;
    double delta_t = 1.0;
    std::vector<double> probabilities;           ///< size count, sums to 1
    std::vector<TaskRef> tasks;                  ///< flattened (pool-major) task list
    std::vector<std::vector<TaskRealization>> realizations; ///< [task][scenario]

    int task_count() const { return static_cast<int>(tasks.size()); }
    const TaskRealization &at(int task, int scenario) const {
        return realizations[task][scenario];
    }
    /// Verifies probability normalization and per-realization feasibility.
    void check() const;

    std::string to_json() const;
    std::string to_csv() const;
};

/// Draws `count` equiprobable scenarios for all tasks of all pools.
/// Deterministic for a fixed seed regardless of execution mode.
ScenarioSet generate_scenarios(const std::vector<ChargingPoolSpec> &pools, int count,
                               std::uint64_t seed, int horizon, double delta_t,
                               ExecMode mode = ExecMode::OpenMP);

/// Summary statistics recomputed directly from the realizations.
struct ScenarioStats {
    std::vector<double> mean_arrival;        ///< per task
    std::vector<double> mean_duration;       ///< per task, periods
    std::vector<double> mean_energy;         ///< per task, kWh
    std::vector<double> expected_plugged_in; ///< per period, expected active tasks
};

ScenarioStats scenario_stats(const ScenarioSet &set);

} // namespace flexopf
