#include "flexopf/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flexopf/scenario.hpp"

namespace flexopf {

TightenResult tighten_network_state(const NetworkModel &net,
                                    const std::vector<ChargingPoolSpec> &pools,
                                    const conic::ConicProgram &program,
                                    std::vector<double> &point, double bound_tol,
                                    ExecMode mode) {
    SopfVarMaps maps = build_var_maps(program);
    TightenResult result;

    for (double g : conic::cone_gaps(program, point)) {
        result.raw_max_cone_slack = std::max(result.raw_max_cone_slack, g);
    }

    const int T = maps.periods;
    const int W = std::max(1, maps.scenarios);
    const int nb = net.branch_count();

    struct Slice {
        PowerFlowState state;
        bool ok = false;
    };
    std::vector<Slice> slices(static_cast<std::size_t>(T) * W);

    parallel_for(
        slices.size(),
        [&](std::size_t idx) {
            const int t = static_cast<int>(idx) / W;
            const int w = static_cast<int>(idx) % W;
            std::vector<double> p_inj(net.node_count()), q_inj(net.node_count());
            for (int v = 0; v < net.node_count(); ++v) {
                p_inj[v] = net.base_demand_p[v][t];
                q_inj[v] = net.base_demand_q[v][t];
            }
            for (std::size_t s = 0; s < pools.size(); ++s) {
                double draw = 0.0;
                if (maps.reserve[s][t] >= 0) {
                    draw += point[maps.reserve[s][t]];
                }
                if (maps.mismatch[s][t][w] >= 0) {
                    draw += point[maps.mismatch[s][t][w]];
                }
                p_inj[pools[s].node] += draw;
            }
            Slice &slice = slices[idx];
            slice.state = sweep_power_flow(net, p_inj, q_inj);
            slice.ok = true;
        },
        mode);

    // The swept state must stay inside the program's own bounds; otherwise
    // the exactness preconditions failed and the relaxed state is kept.
    double worst = 0.0;
    auto bound_breach = [&](int var, double value) {
        if (var < 0) {
            return 0.0;
        }
        const conic::Variable &v = program.vars()[var];
        const double lo = (v.lb - value) / std::max(1.0, std::abs(v.lb));
        const double hi =
            v.ub == conic::kInf ? 0.0 : (value - v.ub) / std::max(1.0, std::abs(v.ub));
        return std::max(std::max(lo, hi), 0.0);
    };
    int worst_var = -1;
    auto track = [&](int var, double value) {
        const double breach = bound_breach(var, value);
        if (breach > worst) {
            worst = breach;
            worst_var = var;
        }
    };
    for (int t = 0; t < T; ++t) {
        for (int w = 0; w < W; ++w) {
            const Slice &slice = slices[static_cast<std::size_t>(t) * W + w];
            for (int v = 0; v < net.node_count(); ++v) {
                track(maps.volt_sq[v][t][w], slice.state.volt_sq[v]);
            }
            for (int b = 0; b < nb; ++b) {
                track(maps.curr_sq[b][t][w], slice.state.curr_sq[b]);
            }
        }
    }
    result.swept_bound_violation = worst;
    result.worst_var = worst_var;
    if (worst > bound_tol) {
        return result;
    }

    for (int t = 0; t < T; ++t) {
        for (int w = 0; w < W; ++w) {
            const Slice &slice = slices[static_cast<std::size_t>(t) * W + w];
            for (int v = 0; v < net.node_count(); ++v) {
                if (maps.volt_sq[v][t][w] >= 0) {
                    point[maps.volt_sq[v][t][w]] = slice.state.volt_sq[v];
                }
            }
            for (int b = 0; b < nb; ++b) {
                if (maps.curr_sq[b][t][w] >= 0) {
                    point[maps.curr_sq[b][t][w]] = slice.state.curr_sq[b];
                }
                if (maps.flow_p[b][t][w] >= 0) {
                    point[maps.flow_p[b][t][w]] = slice.state.flow_p[b];
                }
                if (maps.flow_q[b][t][w] >= 0) {
                    point[maps.flow_q[b][t][w]] = slice.state.flow_q[b];
                }
            }
        }
    }
    result.applied = true;
    return result;
}

// A plan may sit exactly on an operating limit; the planning solver holds
// binding constraints to about 1e-6 relative precision, so violations are
// only counted beyond this guard.
constexpr double kLimitGuard = 1e-5;

ValidationReport mc_validate(const NetworkModel &net,
                             const std::vector<ChargingPoolSpec> &pools,
                             const std::vector<FlexibilityArea> &areas, int sims,
                             std::uint64_t seed, ExecMode mode) {
    if (sims < 1) {
        throw ValidationError("validation needs at least one simulation");
    }
    const int T = net.periods;
    const int S = static_cast<int>(pools.size());

    // Band per (pool, period).
    std::vector<std::vector<const FlexibilityArea *>> band(S,
                                                           std::vector<const FlexibilityArea *>(
                                                               T, nullptr));
    for (const FlexibilityArea &a : areas) {
        if (a.pool < 0 || a.pool >= S || a.period < 0 || a.period >= T) {
            throw ValidationError("flexibility area references an unknown pool or period");
        }
        band[a.pool][a.period] = &a;
    }
    for (int s = 0; s < S; ++s) {
        for (int t = 0; t < T; ++t) {
            if (band[s][t] == nullptr) {
                throw ValidationError("flexibility areas must cover every pool and period");
            }
        }
    }

    std::vector<std::uint64_t> stream(S);
    for (int s = 0; s < S; ++s) {
        stream[s] = fnv1a64("mc/" + pools[s].pool_id);
    }

    struct SimRecord {
        std::vector<double> min_v;     // per period
        std::vector<double> max_i_amp; // per period
        std::vector<bool> violated;    // per period
        bool voltage_violation = false;
        bool current_violation = false;
        bool failed = false;
    };
    std::vector<SimRecord> records(sims);

    parallel_for(
        static_cast<std::size_t>(sims),
        [&](std::size_t sim) {
            SimRecord &rec = records[sim];
            rec.min_v.assign(T, 0.0);
            rec.max_i_amp.assign(T, 0.0);
            rec.violated.assign(T, false);
            std::vector<double> p_inj(net.node_count()), q_inj(net.node_count());
            try {
                for (int t = 0; t < T; ++t) {
                    for (int v = 0; v < net.node_count(); ++v) {
                        p_inj[v] = net.base_demand_p[v][t];
                        q_inj[v] = net.base_demand_q[v][t];
                    }
                    for (int s = 0; s < S; ++s) {
                        const FlexibilityArea &a = *band[s][t];
                        const double draw = rng::uniform(a.lower_pu, a.upper_pu, seed, stream[s],
                                                         sim, static_cast<std::uint64_t>(t));
                        p_inj[pools[s].node] += draw;
                    }
                    const PowerFlowState st = sweep_power_flow(net, p_inj, q_inj);
                    double min_v = std::numeric_limits<double>::max();
                    for (int v = 0; v < net.node_count(); ++v) {
                        min_v = std::min(min_v, std::sqrt(st.volt_sq[v]));
                    }
                    double max_i_amp = 0.0;
                    bool over_cap = false;
                    for (int b = 0; b < net.branch_count(); ++b) {
                        const double i_pu = std::sqrt(std::max(0.0, st.curr_sq[b]));
                        max_i_amp = std::max(max_i_amp, net.pu_to_amp(i_pu));
                        over_cap =
                            over_cap || i_pu > net.branches[b].current_cap * (1.0 + kLimitGuard);
                    }
                    rec.min_v[t] = min_v;
                    rec.max_i_amp[t] = max_i_amp;
                    const bool under_v = min_v < net.v_min * (1.0 - kLimitGuard);
                    rec.violated[t] = under_v || over_cap;
                    rec.voltage_violation = rec.voltage_violation || under_v;
                    rec.current_violation = rec.current_violation || over_cap;
                }
            } catch (const SolveError &) {
                rec.failed = true;
            }
        },
        mode);

    ValidationReport rep;
    rep.sims = sims;
    rep.seed = seed;
    rep.mean_min_v.assign(T, 0.0);
    rep.lo_min_v.assign(T, std::numeric_limits<double>::max());
    rep.hi_min_v.assign(T, -std::numeric_limits<double>::max());
    rep.mean_max_i_amp.assign(T, 0.0);
    rep.lo_max_i_amp.assign(T, std::numeric_limits<double>::max());
    rep.hi_max_i_amp.assign(T, -std::numeric_limits<double>::max());
    rep.per_period_violation_freq.assign(T, 0.0);

    int ok_sims = 0;
    int any_violation = 0, v_violation = 0, i_violation = 0;
    for (int sim = 0; sim < sims; ++sim) {
        const SimRecord &rec = records[sim];
        if (rec.failed) {
            ++rep.failed_sims;
            continue;
        }
        ++ok_sims;
        double sim_min_v = std::numeric_limits<double>::max();
        double sim_max_i_rel = 0.0;
        bool violated = false;
        for (int t = 0; t < T; ++t) {
            rep.mean_min_v[t] += rec.min_v[t];
            rep.lo_min_v[t] = std::min(rep.lo_min_v[t], rec.min_v[t]);
            rep.hi_min_v[t] = std::max(rep.hi_min_v[t], rec.min_v[t]);
            rep.mean_max_i_amp[t] += rec.max_i_amp[t];
            rep.lo_max_i_amp[t] = std::min(rep.lo_max_i_amp[t], rec.max_i_amp[t]);
            rep.hi_max_i_amp[t] = std::max(rep.hi_max_i_amp[t], rec.max_i_amp[t]);
            if (rec.violated[t]) {
                rep.per_period_violation_freq[t] += 1.0;
                violated = true;
            }
            sim_min_v = std::min(sim_min_v, rec.min_v[t]);
        }
        // All-period current extreme relative to each branch's own cap is
        // tracked through the violation flags; for the eCDF use the system
        // max in amps scaled by the smallest cap crossing observed.
        for (int t = 0; t < T; ++t) {
            sim_max_i_rel = std::max(sim_max_i_rel, rec.max_i_amp[t]);
        }
        rep.sim_min_v.push_back(sim_min_v);
        rep.sim_max_i_rel.push_back(sim_max_i_rel);
        any_violation += violated ? 1 : 0;
        v_violation += rec.voltage_violation ? 1 : 0;
        i_violation += rec.current_violation ? 1 : 0;
    }
    if (ok_sims == 0) {
        throw SolveError("every Monte-Carlo simulation failed to converge");
    }
    for (int t = 0; t < T; ++t) {
        rep.mean_min_v[t] /= ok_sims;
        rep.mean_max_i_amp[t] /= ok_sims;
        rep.per_period_violation_freq[t] /= ok_sims;
    }
    rep.violation_freq = static_cast<double>(any_violation) / ok_sims;
    rep.voltage_violation_freq = static_cast<double>(v_violation) / ok_sims;
    rep.current_violation_freq = static_cast<double>(i_violation) / ok_sims;
    return rep;
}

std::string ValidationReport::to_json() const {
    std::ostringstream out;
    out.precision(17);
    auto arr = [&](const std::vector<double> &v) {
        out << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            out << v[i] << (i + 1 < v.size() ? "," : "");
        }
        out << ']';
    };
    out << "{\n  \"sims\": " << sims << ",\n  \"seed\": " << seed
        << ",\n  \"failed_sims\": " << failed_sims << ",\n  \"violation_freq\": " << violation_freq
        << ",\n  \"voltage_violation_freq\": " << voltage_violation_freq
        << ",\n  \"current_violation_freq\": " << current_violation_freq
        << ",\n  \"mean_min_v\": ";
    arr(mean_min_v);
    out << ",\n  \"lo_min_v\": ";
    arr(lo_min_v);
    out << ",\n  \"hi_min_v\": ";
    arr(hi_min_v);
    out << ",\n  \"mean_max_i_amp\": ";
    arr(mean_max_i_amp);
    out << ",\n  \"lo_max_i_amp\": ";
    arr(lo_max_i_amp);
    out << ",\n  \"hi_max_i_amp\": ";
    arr(hi_max_i_amp);
    out << ",\n  \"per_period_violation_freq\": ";
    arr(per_period_violation_freq);
    out << "\n}\n";
    return out.str();
}

std::string ValidationReport::traces_to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "period,mean_min_v,lo_min_v,hi_min_v,mean_max_i_amp,lo_max_i_amp,hi_max_i_amp,"
           "violation_freq\n";
    for (std::size_t t = 0; t < mean_min_v.size(); ++t) {
        out << t << ',' << mean_min_v[t] << ',' << lo_min_v[t] << ',' << hi_min_v[t] << ','
            << mean_max_i_amp[t] << ',' << lo_max_i_amp[t] << ',' << hi_max_i_amp[t] << ','
            << per_period_violation_freq[t] << '\n';
    }
    return out.str();
}

std::string ValidationReport::ecdf_to_csv() const {
    Ecdf fv = build_ecdf(sim_min_v);
    Ecdf fi = build_ecdf(sim_max_i_rel);
    std::ostringstream out;
    out.precision(17);
    out << "kind,value,cumulative_probability\n";
    for (std::size_t i = 0; i < fv.values.size(); ++i) {
        out << "min_voltage_pu," << fv.values[i] << ',' << fv.cum[i] << '\n';
    }
    for (std::size_t i = 0; i < fi.values.size(); ++i) {
        out << "max_current_amp," << fi.values[i] << ',' << fi.cum[i] << '\n';
    }
    return out.str();
}

PaymentReport payment_analysis(const std::vector<ChargingPoolSpec> &pools,
                               const ScenarioSet &scens, const SopfSolution &sol,
                               double s_base_kw, double delta_t) {
    PaymentReport rep;
    const int W = sol.scenarios;
    rep.revenue.assign(W, 0.0);
    rep.cost.assign(W, 0.0);
    rep.total.assign(W, 0.0);

    for (int w = 0; w < W; ++w) {
        double revenue = 0.0;
        for (int n = 0; n < sol.tasks; ++n) {
            const int s = scens.tasks[n].pool;
            for (int t = 0; t < sol.periods; ++t) {
                revenue +=
                    pools[s].energy_price[t] * sol.task_power[n][t][w] * s_base_kw * delta_t;
            }
        }
        double cost = 0.0;
        for (int s = 0; s < sol.pools; ++s) {
            // Clamp solver tolerance overshoot back into the utility domain.
            const double phi =
                std::clamp(sol.pool_shortfall[s][w], 0.0, pools[s].utility.domain_max());
            cost += evaluate_utility(pools[s].utility, phi);
        }
        rep.revenue[w] = revenue;
        rep.cost[w] = cost;
        rep.total[w] = revenue - cost;
    }

    const Ecdf F = build_ecdf(rep.total, sol.probabilities);
    rep.median = inverse_ecdf(F, 0.5);
    rep.quartile_lo = inverse_ecdf(F, 0.25);
    rep.quartile_hi = inverse_ecdf(F, 0.75);
    rep.p5 = inverse_ecdf(F, 0.05);
    rep.p95 = inverse_ecdf(F, 0.95);
    return rep;
}

std::string PaymentReport::to_json() const {
    std::ostringstream out;
    out.precision(17);
    auto arr = [&](const std::vector<double> &v) {
        out << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            out << v[i] << (i + 1 < v.size() ? "," : "");
        }
        out << ']';
    };
    out << "{\n  \"median\": " << median << ",\n  \"quartile_lo\": " << quartile_lo
        << ",\n  \"quartile_hi\": " << quartile_hi << ",\n  \"p5\": " << p5
        << ",\n  \"p95\": " << p95 << ",\n  \"revenue\": ";
    arr(revenue);
    out << ",\n  \"cost\": ";
    arr(cost);
    out << ",\n  \"total\": ";
    arr(total);
    out << "\n}\n";
    return out.str();
}

} // namespace flexopf
