#include "flexopf/pools.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace flexopf {

using nlohmann::json;

void TaskSpec::check(int periods, const std::string &label) const {
    if (mean_arrival < 0 || mean_arrival >= periods) {
        throw ValidationError(label + ": mean_arrival must lie in [0, periods)");
    }
    if (mean_duration_rate <= 0) {
        throw ValidationError(label + ": mean_duration_rate must be positive");
    }
    if (e_min < 0 || e_max < e_min) {
        throw ValidationError(label + ": needs 0 <= e_min <= e_max");
    }
    if (x_max <= 0) {
        throw ValidationError(label + ": x_max must be positive");
    }
}

void ChargingPoolSpec::check(const NetworkModel &net) const {
    if (node < 0 || node >= net.node_count()) {
        throw ValidationError("pool " + pool_id + ": unknown node '" + node_id + "'");
    }
    if (static_cast<int>(p_max.size()) != net.periods ||
        static_cast<int>(energy_price.size()) != net.periods) {
        throw ValidationError("pool " + pool_id + ": p_max and price need one entry per period");
    }
    for (int t = 0; t < net.periods; ++t) {
        if (p_max[t] < 0) {
            throw ValidationError("pool " + pool_id + ": p_max must be nonnegative");
        }
        if (energy_price[t] < 0) {
            throw ValidationError("pool " + pool_id + ": energy_price must be nonnegative");
        }
    }
    utility.check("pool " + pool_id + " utility");
    for (const TaskSpec &task : tasks) {
        task.check(net.periods, "pool " + pool_id + " task " + task.task_id);
    }
}

namespace {

std::vector<double> per_period(const json &j, int periods, const std::string &what) {
    std::vector<double> out;
    if (j.is_number()) {
        out.assign(periods, j.get<double>());
    } else if (j.is_array()) {
        if (static_cast<int>(j.size()) != periods) {
            throw ParseError(what + " must be a scalar or an array of length " +
                             std::to_string(periods));
        }
        for (const auto &v : j) {
            out.push_back(v.get<double>());
        }
    } else {
        throw ParseError(what + " must be a number or array");
    }
    return out;
}

} // namespace

std::vector<ChargingPoolSpec> parse_pools(const std::string &json_text, const NetworkModel &net,
                                          const std::string &origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception &e) {
        throw ParseError("pools file " + origin + ": " + e.what());
    }
    if (!doc.contains("pools") || !doc["pools"].is_array()) {
        throw ParseError("pools file " + origin + ": missing 'pools' array");
    }

    std::vector<ChargingPoolSpec> pools;
    std::set<std::string> pool_ids;
    for (const auto &jp : doc["pools"]) {
        ChargingPoolSpec p;
        p.pool_id = jp.at("id").get<std::string>();
        if (!pool_ids.insert(p.pool_id).second) {
            throw ValidationError("duplicate pool id '" + p.pool_id + "'");
        }
        p.node_id = jp.at("node").get<std::string>();
        p.node = net.node_index(p.node_id);

        std::vector<double> pmax_kw =
            per_period(jp.at("p_max_kw"), net.periods, "pool " + p.pool_id + " p_max_kw");
        p.p_max.reserve(net.periods);
        for (double kw : pmax_kw) {
            p.p_max.push_back(net.kw_to_pu(kw));
        }
        p.energy_price = per_period(jp.at("price_eur_per_kwh"), net.periods,
                                    "pool " + p.pool_id + " price_eur_per_kwh");

        const json &ju = jp.at("utility");
        p.utility.alpha = ju.at("alpha_kwh").get<std::vector<double>>();
        p.utility.slope = ju.at("h").get<std::vector<double>>();
        p.utility.intercept = ju.at("b").get<std::vector<double>>();

        std::set<std::string> task_ids;
        for (const auto &jt : jp.at("tasks")) {
            TaskSpec t;
            t.task_id = jt.at("id").get<std::string>();
            if (!task_ids.insert(t.task_id).second) {
                throw ValidationError("pool " + p.pool_id + ": duplicate task id '" + t.task_id +
                                      "'");
            }
            t.mean_arrival = jt.at("mean_arrival").get<double>();
            t.mean_duration_rate = jt.at("mean_duration_rate").get<double>();
            t.e_min = jt.value("e_min_kwh", 0.0);
            t.e_max = jt.at("e_max_kwh").get<double>();
            t.x_max = jt.at("x_max_kw").get<double>();
            p.tasks.push_back(t);
        }
        p.check(net);
        pools.push_back(std::move(p));
    }
    return pools;
}

std::vector<ChargingPoolSpec> load_pools(const std::string &path, const NetworkModel &net) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open pools file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_pools(ss.str(), net, path);
}

} // namespace flexopf
