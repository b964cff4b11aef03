#include "flexopf/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace flexopf {

using nlohmann::json;

PlanOutputs solve_plan(const NetworkModel &net, const std::vector<ChargingPoolSpec> &pools,
                       const ScenarioSet &scens, const SopfOptions &sopf_options,
                       const conic::SolverOptions &solver_options, bool restore_exactness) {
    PlanOutputs out;
    out.build = build_sopf(net, pools, scens, sopf_options);
    auto [point, report] = conic::solve_misocp(out.build.program, solver_options, out.build.hints);
    out.point = std::move(point);
    out.report = report;
    // A reduced-accuracy endgame leaves larger residuals everywhere; scale
    // the acceptance of the point accordingly rather than rejecting it.
    const double tol = out.report.reduced_accuracy ? 1e-4 : 1e-5;
    if (restore_exactness) {
        out.tighten = tighten_network_state(net, pools, out.build.program, out.point,
                                            std::max(1e-5, tol), sopf_options.exec);
        if (!out.tighten.applied) {
            std::fprintf(stderr,
                         "[flexopf] exactness restoration skipped: swept state breaches %s "
                         "by %.2e (relative)\n",
                         out.tighten.worst_var >= 0
                             ? out.build.program.var_name(out.tighten.worst_var).c_str()
                             : "?",
                         out.tighten.swept_bound_violation);
        }
    }
    out.solution = extract_solution(net, out.build.program, out.point, out.report,
                                    scens.probabilities, tol);
    out.exactness = check_exactness(net, out.solution);
    return out;
}

SolutionTraces solution_traces(const NetworkModel &net, const SopfSolution &sol) {
    SolutionTraces tr;
    const int T = sol.periods;
    const int W = sol.scenarios;
    tr.mean_min_v.assign(T, 0.0);
    tr.lo_min_v.assign(T, std::numeric_limits<double>::max());
    tr.hi_min_v.assign(T, -std::numeric_limits<double>::max());
    tr.mean_max_i_amp.assign(T, 0.0);
    tr.lo_max_i_amp.assign(T, std::numeric_limits<double>::max());
    tr.hi_max_i_amp.assign(T, -std::numeric_limits<double>::max());
    tr.substation_mean_i_amp.assign(T, 0.0);

    int substation_branch = 0;
    for (int b = 0; b < net.branch_count(); ++b) {
        if (net.branches[b].from == net.substation) {
            substation_branch = b;
            break;
        }
    }

    for (int t = 0; t < T; ++t) {
        for (int w = 0; w < W; ++w) {
            double min_v = std::numeric_limits<double>::max();
            for (int v = 0; v < static_cast<int>(sol.volt_sq.size()); ++v) {
                min_v = std::min(min_v, std::sqrt(sol.volt_sq[v][t][w]));
            }
            double max_i = 0.0;
            for (int b = 0; b < static_cast<int>(sol.curr_sq.size()); ++b) {
                max_i = std::max(max_i, std::sqrt(std::max(0.0, sol.curr_sq[b][t][w])));
            }
            const double max_i_amp = net.pu_to_amp(max_i);
            tr.mean_min_v[t] += min_v / W;
            tr.lo_min_v[t] = std::min(tr.lo_min_v[t], min_v);
            tr.hi_min_v[t] = std::max(tr.hi_min_v[t], min_v);
            tr.mean_max_i_amp[t] += max_i_amp / W;
            tr.lo_max_i_amp[t] = std::min(tr.lo_max_i_amp[t], max_i_amp);
            tr.hi_max_i_amp[t] = std::max(tr.hi_max_i_amp[t], max_i_amp);
            tr.substation_mean_i_amp[t] +=
                net.pu_to_amp(std::sqrt(std::max(0.0, sol.curr_sq[substation_branch][t][w]))) / W;
        }
    }
    return tr;
}

std::string SolutionTraces::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "period,mean_min_v,lo_min_v,hi_min_v,mean_max_i_amp,lo_max_i_amp,hi_max_i_amp,"
           "substation_mean_i_amp\n";
    for (std::size_t t = 0; t < mean_min_v.size(); ++t) {
        out << t << ',' << mean_min_v[t] << ',' << lo_min_v[t] << ',' << hi_min_v[t] << ','
            << mean_max_i_amp[t] << ',' << lo_max_i_amp[t] << ',' << hi_max_i_amp[t] << ','
            << substation_mean_i_amp[t] << '\n';
    }
    return out.str();
}

namespace {

class ArtifactWriter {
  public:
    explicit ArtifactWriter(const std::string &dir) : dir_(dir) {
        std::filesystem::create_directories(dir_);
    }
    void write(const std::string &name, const std::string &content) {
        const std::filesystem::path path = std::filesystem::path(dir_) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw Error("cannot write artifact: " + path.string());
        }
        out << content;
        out.close();
        hashes_[name] = to_hex(fnv1a64(content));
    }
    const std::map<std::string, std::string> &hashes() const { return hashes_; }

  private:
    std::string dir_;
    std::map<std::string, std::string> hashes_;
};

std::string summary_json(const PlanOutputs &plan) {
    json j;
    j["status"] = conic::to_string(plan.report.status);
    j["objective"] = plan.solution.objective;
    j["expected_flex_cost"] = plan.solution.expected_flex_cost();
    j["bound_gap"] = plan.report.bound_gap;
    j["best_bound"] = plan.report.best_bound;
    j["heuristic"] = plan.report.heuristic;
    j["iterations"] = plan.report.iterations;
    j["bb_nodes"] = plan.report.bb_nodes;
    j["binaries_dropped"] = plan.build.binaries_dropped;
    j["max_cone_slack"] = plan.exactness.max_gap;
    j["cones_above_tol"] = plan.exactness.gaps_above_tol.size();
    j["binding_upper_voltage"] = plan.exactness.binding_upper_voltage.size();
    j["exactness_restored"] = plan.tighten.applied;
    j["raw_max_cone_slack"] = plan.tighten.raw_max_cone_slack;
    j["variables"] = plan.build.program.num_vars();
    j["binaries"] = plan.build.program.num_binaries();
    return j.dump(2) + "\n";
}

std::string reserve_csv(const SopfSolution &sol, const std::vector<ChargingPoolSpec> &pools,
                        double s_base_kw) {
    std::ostringstream out;
    out.precision(17);
    out << "pool,period,reserve_kw,mean_mismatch_kw,max_mismatch_kw\n";
    for (int s = 0; s < sol.pools; ++s) {
        for (int t = 0; t < sol.periods; ++t) {
            double mean = 0.0, mx = 0.0;
            for (int w = 0; w < sol.scenarios; ++w) {
                mean += sol.probabilities[w] * sol.mismatch[s][t][w];
                mx = std::max(mx, sol.mismatch[s][t][w]);
            }
            out << pools[s].pool_id << ',' << t << ',' << sol.reserve[s][t] * s_base_kw << ','
                << mean * s_base_kw << ',' << mx * s_base_kw << '\n';
        }
    }
    return out.str();
}

int exit_code_for(const SolveError &e) {
    const std::string what = e.what();
    if (what.find("infeasible") != std::string::npos) {
        return kExitInfeasible;
    }
    return kExitSolverLimit;
}

} // namespace

namespace {

class StageLog {
  public:
    explicit StageLog(std::string name) : name_(std::move(name)), t0_(Clock::now()) {}
    void done(const PlanOutputs *plan = nullptr) const {
        const std::chrono::duration<double> dt = Clock::now() - t0_;
        if (plan != nullptr) {
            std::fprintf(stderr,
                         "[flexopf] %-14s %6.1fs  status=%s iters=%d raw_slack=%.1e "
                         "restored=%d\n",
                         name_.c_str(), dt.count(), conic::to_string(plan->report.status),
                         plan->report.iterations, plan->tighten.raw_max_cone_slack,
                         plan->tighten.applied ? 1 : 0);
        } else {
            std::fprintf(stderr, "[flexopf] %-14s %6.1fs\n", name_.c_str(), dt.count());
        }
    }

  private:
    using Clock = std::chrono::steady_clock;
    std::string name_;
    Clock::time_point t0_;
};

} // namespace

int run(const RunConfig &cfg) {
    std::string stage = "setup";
    try {
        ArtifactWriter artifacts(cfg.out_dir);

        stage = "load_inputs";
        const NetworkModel net = load_network(cfg.network_path);
        const std::vector<ChargingPoolSpec> pools = load_pools(cfg.pools_path, net);

        stage = "generate_scenarios";
        const ScenarioSet scens = generate_scenarios(pools, cfg.scenario_count,
                                                     cfg.scenario_seed, net.periods, net.delta_t,
                                                     cfg.exec);
        artifacts.write("scenarios.csv", scens.to_csv());

        BetaSpec beta(cfg.beta);
        for (const BetaOverride &o : cfg.beta_overrides) {
            int pool_index = -1;
            for (std::size_t s = 0; s < pools.size(); ++s) {
                if (pools[s].pool_id == o.pool_id) {
                    pool_index = static_cast<int>(s);
                }
            }
            if (pool_index < 0) {
                throw ValidationError("beta override references unknown pool '" + o.pool_id +
                                      "'");
            }
            if (o.period >= net.periods) {
                throw ValidationError("beta override period out of range");
            }
            beta.set_override(pool_index, o.period, o.beta);
        }

        SopfOptions sopf_options;
        sopf_options.exec = cfg.exec;

        const bool want_base = cfg.mode == RunMode::Base || cfg.mode == RunMode::Full;
        const bool want_flex = cfg.mode != RunMode::Base;
        const bool want_validate = cfg.mode == RunMode::Validate || cfg.mode == RunMode::Full;
        const bool want_payment = cfg.mode == RunMode::Payment || cfg.mode == RunMode::Full;

        if (want_base) {
            stage = "base_case";
            StageLog log(stage);
            SopfOptions base_options = sopf_options;
            base_options.base_case = true;
            PlanOutputs base = solve_plan(net, pools, scens, base_options, cfg.solver,
                                          cfg.restore_exactness);
            artifacts.write("base_summary.json", summary_json(base));
            artifacts.write("base_traces.csv", solution_traces(net, base.solution).to_csv());
            log.done(&base);
        }

        if (want_flex) {
            stage = "flex_plan";
            StageLog flex_log(stage);
            PlanOutputs flex =
                solve_plan(net, pools, scens, sopf_options, cfg.solver, cfg.restore_exactness);
            flex_log.done(&flex);
            artifacts.write("flex_summary.json", summary_json(flex));
            artifacts.write("flex_traces.csv", solution_traces(net, flex.solution).to_csv());
            artifacts.write("reserve.csv", reserve_csv(flex.solution, pools, net.s_base_kw()));

            stage = "flex_areas";
            std::vector<std::string> pool_ids;
            for (const ChargingPoolSpec &p : pools) {
                pool_ids.push_back(p.pool_id);
            }
            const std::vector<FlexibilityArea> areas =
                flexibility_areas(flex.solution, beta, net.s_base_kw());
            artifacts.write("areas.csv", areas_to_csv(areas, pool_ids));
            artifacts.write("areas.json", areas_to_json(areas, pool_ids));

            if (want_validate) {
                stage = "mc_validate";
                StageLog log(stage);
                const ValidationReport rep = mc_validate(net, pools, areas, cfg.validation_sims,
                                                         cfg.validation_seed, cfg.exec);
                log.done();
                artifacts.write("validation.json", rep.to_json());
                artifacts.write("validation_traces.csv", rep.traces_to_csv());
                artifacts.write("validation_ecdf.csv", rep.ecdf_to_csv());
            }

            if (want_payment) {
                stage = "payment";
                std::ostringstream box;
                box.precision(17);
                box << "beta,median,quartile_lo,quartile_hi,p5,p95,mean_shortfall_kwh\n";
                json per_beta = json::array();
                for (double b : cfg.payment_betas) {
                    StageLog log("payment b=" + std::to_string(b).substr(0, 4));
                    const std::vector<FlexibilityArea> capped_areas =
                        flexibility_areas(flex.solution, BetaSpec(b), net.s_base_kw());
                    // The areas become hard caps for fresh operating scenarios.
                    std::vector<ChargingPoolSpec> capped = pools;
                    for (const FlexibilityArea &a : capped_areas) {
                        // Keep a 1 W floor: an exactly-zero cap removes the
                        // strict interior the interior-point method needs.
                        capped[a.pool].p_max[a.period] = std::max(1e-6, a.upper_pu);
                    }
                    const ScenarioSet op_scens =
                        generate_scenarios(capped, cfg.payment_scenarios, cfg.payment_seed,
                                           net.periods, net.delta_t, cfg.exec);
                    PlanOutputs op = solve_plan(net, capped, op_scens, sopf_options, cfg.solver,
                                                cfg.restore_exactness);
                    const PaymentReport pay = payment_analysis(capped, op_scens, op.solution,
                                                               net.s_base_kw(), net.delta_t);
                    double mean_shortfall = 0.0;
                    for (int s = 0; s < op.solution.pools; ++s) {
                        for (int w = 0; w < op.solution.scenarios; ++w) {
                            mean_shortfall += op.solution.probabilities[w] *
                                              op.solution.pool_shortfall[s][w];
                        }
                    }
                    box << b << ',' << pay.median << ',' << pay.quartile_lo << ','
                        << pay.quartile_hi << ',' << pay.p5 << ',' << pay.p95 << ','
                        << mean_shortfall << '\n';
                    json jb;
                    jb["beta"] = b;
                    jb["report"] = json::parse(pay.to_json());
                    per_beta.push_back(jb);
                    log.done(&op);
                }
                artifacts.write("payment_summary.csv", box.str());
                artifacts.write("payment.json", per_beta.dump(2) + "\n");
            }
        }

        stage = "manifest";
        json manifest;
        manifest["tool"] = "flexopf 1.0.0";
        manifest["config"] = json::parse(config_to_json(cfg));
        manifest["inputs"] = {
            {"network", {{"path", cfg.network_path}, {"fnv1a64", to_hex(fnv1a64_file(cfg.network_path))}}},
            {"pools", {{"path", cfg.pools_path}, {"fnv1a64", to_hex(fnv1a64_file(cfg.pools_path))}}},
        };
        json outputs = json::array();
        for (const auto &[name, hash] : artifacts.hashes()) {
            outputs.push_back({{"path", name}, {"fnv1a64", hash}});
        }
        manifest["outputs"] = outputs;
        manifest["seeds"] = {{"scenario", cfg.scenario_seed},
                             {"validation", cfg.validation_seed},
                             {"payment", cfg.payment_seed}};
        {
            const std::filesystem::path path = std::filesystem::path(cfg.out_dir) / "manifest.json";
            std::ofstream out(path, std::ios::binary);
            out << manifest.dump(2) << "\n";
        }
        return kExitOk;
    } catch (const std::exception &e) {
        int code = kExitConfigError;
        if (const auto *se = dynamic_cast<const SolveError *>(&e)) {
            code = exit_code_for(*se);
        } else if (dynamic_cast<const ParseError *>(&e) ||
                   dynamic_cast<const ValidationError *>(&e)) {
            code = kExitConfigError;
        } else {
            code = 1;
        }
        try {
            std::filesystem::create_directories(cfg.out_dir);
            json err;
            err["error"] = {{"stage", stage}, {"message", e.what()}, {"exit_code", code}};
            std::ofstream out(std::filesystem::path(cfg.out_dir) / "error.json",
                              std::ios::binary);
            out << err.dump(2) << "\n";
        } catch (...) {
        }
        std::fprintf(stderr, "error [%s]: %s\n", stage.c_str(), e.what());
        return code;
    }
}

} // namespace flexopf
