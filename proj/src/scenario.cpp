#include "flexopf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace flexopf {

namespace rng {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                  std::uint64_t field) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ stream);
    h = mix64(h ^ index);
    h = mix64(h ^ field);
    return h;
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                 std::uint64_t field) {
    return static_cast<double>(key(seed, stream, index, field) >> 11) * 0x1.0p-53;
}

double uniform(double lo, double hi, std::uint64_t seed, std::uint64_t stream,
               std::uint64_t index, std::uint64_t field) {
    return lo + (hi - lo) * uniform01(seed, stream, index, field);
}

double exponential(double rate, std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                   std::uint64_t field) {
    const double u = uniform01(seed, stream, index, field);
    return -std::log1p(-u) / rate;
}

int poisson(double mean, std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
            std::uint64_t field) {
    const double u = uniform01(seed, stream, index, field);
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    // Hard stop far in the tail in case of rounding stagnation.
    const int k_max = static_cast<int>(mean + 40.0 * std::sqrt(mean) + 50.0);
    while (u > cdf && k < k_max) {
        ++k;
        p *= mean / k;
        cdf += p;
    }
    return k;
}

} // namespace rng

namespace {
constexpr std::uint64_t kFieldArrival = 1;
constexpr std::uint64_t kFieldDuration = 2;
constexpr std::uint64_t kFieldEnergy = 3;
} // namespace

void ScenarioSet::check() const {
    double total = 0.0;
    for (double p : probabilities) {
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("scenario probabilities do not sum to 1");
    }
    for (int n = 0; n < task_count(); ++n) {
        for (int w = 0; w < count; ++w) {
            const TaskRealization &r = realizations[n][w];
            if (!(r.arrival < r.departure && r.departure <= horizon)) {
                throw ValidationError("realization violates arrival < departure <= horizon");
            }
            const double cap = tasks[n].x_max * (r.departure - r.arrival) * delta_t;
            if (r.energy < 0 || r.energy > cap + 1e-9) {
                throw ValidationError("realization energy exceeds window capacity");
            }
        }
    }
}

ScenarioSet generate_scenarios(const std::vector<ChargingPoolSpec> &pools, int count,
                               std::uint64_t seed, int horizon, double delta_t, ExecMode mode) {
    if (count < 1) {
        throw ValidationError("scenario count must be at least 1");
    }
    if (horizon < 2) {
        throw ValidationError("horizon must have at least 2 periods");
    }

    ScenarioSet set;
    set.count = count;
    set.seed = seed;
    set.horizon = horizon;
    set.delta_t = delta_t;
    set.probabilities.assign(count, 1.0 / count);

    std::vector<const TaskSpec *> specs;
    for (std::size_t p = 0; p < pools.size(); ++p) {
        for (std::size_t n = 0; n < pools[p].tasks.size(); ++n) {
            const TaskSpec &t = pools[p].tasks[n];
            t.check(horizon, "pool " + pools[p].pool_id + " task " + t.task_id);
            TaskRef ref;
            ref.pool = static_cast<int>(p);
            ref.task = static_cast<int>(n);
            ref.pool_id = pools[p].pool_id;
            ref.task_id = t.task_id;
            ref.x_max = t.x_max;
            set.tasks.push_back(ref);
            specs.push_back(&t);
        }
    }

    const int n_tasks = set.task_count();
    set.realizations.assign(n_tasks, std::vector<TaskRealization>(count));

    // Streams are keyed by a hash of the task identity, not by position, so
    // draws are independent of task ordering and of the parallel schedule.
    std::vector<std::uint64_t> stream(n_tasks);
    for (int n = 0; n < n_tasks; ++n) {
        stream[n] = fnv1a64(set.tasks[n].pool_id + "/" + set.tasks[n].task_id);
    }

    parallel_for(
        static_cast<std::size_t>(n_tasks) * count,
        [&](std::size_t idx) {
            const int n = static_cast<int>(idx / count);
            const int w = static_cast<int>(idx % count);
            const TaskSpec &spec = *specs[n];

            int arrival = rng::poisson(spec.mean_arrival, seed, stream[n], w, kFieldArrival);
            arrival = std::min(arrival, horizon - 2);

            const double hours =
                rng::exponential(spec.mean_duration_rate, seed, stream[n], w, kFieldDuration);
            int dur = std::max(1, static_cast<int>(std::ceil(hours / delta_t)));
            const int departure = std::min(horizon, arrival + dur);

            const double requested =
                rng::uniform(spec.e_min, spec.e_max, seed, stream[n], w, kFieldEnergy);
            const double deliverable = spec.x_max * (departure - arrival) * delta_t;

            TaskRealization &r = set.realizations[n][w];
            r.arrival = arrival;
            r.departure = departure;
            r.energy = std::min(requested, deliverable);
        },
        mode);

    set.check();
    return set;
}

ScenarioStats scenario_stats(const ScenarioSet &set) {
    if (set.count == 0 || set.task_count() == 0) {
        throw ValidationError("scenario_stats needs a nonempty scenario set");
    }
    ScenarioStats st;
    const int n_tasks = set.task_count();
    st.mean_arrival.assign(n_tasks, 0.0);
    st.mean_duration.assign(n_tasks, 0.0);
    st.mean_energy.assign(n_tasks, 0.0);
    st.expected_plugged_in.assign(set.horizon, 0.0);

    for (int n = 0; n < n_tasks; ++n) {
        for (int w = 0; w < set.count; ++w) {
            const TaskRealization &r = set.realizations[n][w];
            const double pi = set.probabilities[w];
            st.mean_arrival[n] += pi * r.arrival;
            st.mean_duration[n] += pi * (r.departure - r.arrival);
            st.mean_energy[n] += pi * r.energy;
            for (int t = r.arrival; t < r.departure; ++t) {
                st.expected_plugged_in[t] += pi;
            }
        }
    }
    return st;
}

std::string ScenarioSet::to_json() const {
    nlohmann::json j;
    j["count"] = count;
    j["seed"] = seed;
    j["horizon"] = horizon;
    j["delta_t_hours"] = delta_t;
    j["probabilities"] = probabilities;
    nlohmann::json jt = nlohmann::json::array();
    for (int n = 0; n < task_count(); ++n) {
        nlohmann::json rec;
        rec["pool"] = tasks[n].pool_id;
        rec["task"] = tasks[n].task_id;
        nlohmann::json arr = nlohmann::json::array();
        for (int w = 0; w < count; ++w) {
            const TaskRealization &r = realizations[n][w];
            arr.push_back({r.arrival, r.departure, r.energy});
        }
        rec["realizations"] = arr;
        jt.push_back(rec);
    }
    j["tasks"] = jt;
    return j.dump(2);
}

std::string ScenarioSet::to_csv() const {
    std::ostringstream out;
    out << "scenario,pool,task,arrival,departure,energy_kwh\n";
    out.precision(17);
    for (int w = 0; w < count; ++w) {
        for (int n = 0; n < task_count(); ++n) {
            const TaskRealization &r = realizations[n][w];
            out << w << ',' << tasks[n].pool_id << ',' << tasks[n].task_id << ',' << r.arrival
                << ',' << r.departure << ',' << r.energy << '\n';
        }
    }
    return out.str();
}

} // namespace flexopf
