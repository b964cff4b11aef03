#pragma once

#include <string>
#include <vector>

#include "flexopf/netmodel.hpp"
#include "flexopf/utility.hpp"

namespace flexopf {

/// One EV charging session: expected arrival period, expected duration rate
/// and the energy request range. Realizations are drawn per scenario.
struct TaskSpec {
    std::string task_id;
    double mean_arrival = 0.0;       ///< expected arrival period
    double mean_duration_rate = 0.5; ///< 1/hours; mean plugged-in time is its inverse
    double e_min = 0.0;              ///< kWh
    double e_max = 0.0;              ///< kWh
    double x_max = 22.0;             ///< kW, maximum charging power

    void check(int periods, const std::string &label) const;
};

/// Aggregator controlling the charging points at one network node.
struct ChargingPoolSpec {
    std::string pool_id;
    std::string node_id;
    int node = -1;                    ///< index into NetworkModel::node_ids
    std::vector<double> p_max;        ///< per period, pu
    std::vector<double> energy_price; ///< per period, currency/kWh
    UtilityFunction utility;
    std::vector<TaskSpec> tasks;

    void check(const NetworkModel &net) const;
};

/// Loads pool/task/utility definitions and resolves node references against
/// the network. Powers in the file are kW; they are stored per-unit.
std::vector<ChargingPoolSpec> load_pools(const std::string &path, const NetworkModel &net);
std::vector<ChargingPoolSpec> parse_pools(const std::string &json_text, const NetworkModel &net,
                                          const std::string &origin = "<string>");

} // namespace flexopf
