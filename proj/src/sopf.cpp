#include "flexopf/sopf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace flexopf {

using conic::ConicProgram;
using conic::kInf;
using conic::LinearRow;
using conic::RotatedCone;
using conic::VarKind;
using conic::VarMeta;
using conic::VarRole;

namespace {

std::string idx3(const char *tag, int a, int b, int c) {
    std::ostringstream s;
    s << tag << '.' << a << '.' << b << '.' << c;
    return s.str();
}

std::string idx2(const char *tag, int a, int b) {
    std::ostringstream s;
    s << tag << '.' << a << '.' << b;
    return s.str();
}

} // namespace

SopfProgram build_sopf(const NetworkModel &net, const std::vector<ChargingPoolSpec> &pools,
                       const ScenarioSet &scens, const SopfOptions &opt) {
    if (scens.horizon != net.periods) {
        throw ValidationError("scenario horizon does not match the network horizon");
    }
    if (std::abs(scens.delta_t - net.delta_t) > 1e-12) {
        throw ValidationError("scenario delta_t does not match the network delta_t");
    }
    for (const ChargingPoolSpec &p : pools) {
        p.check(net);
    }
    scens.check();

    const int S = static_cast<int>(pools.size());
    const int T = net.periods;
    const int W = scens.count;
    const int N = scens.task_count();
    const double e_scale = net.s_base_kw() * net.delta_t; // pu power -> kWh per period

    SopfProgram out;
    out.pools = S;
    out.periods = T;
    out.scenarios = W;
    out.tasks = N;
    ConicProgram &prog = out.program;

    // Tasks of each pool inside the flattened scenario task list.
    std::vector<std::vector<int>> pool_tasks(S);
    for (int n = 0; n < N; ++n) {
        pool_tasks[scens.tasks[n].pool].push_back(n);
    }

    bool drop_binaries = opt.drop_binaries_when_convex && !pools.empty();
    for (const ChargingPoolSpec &p : pools) {
        drop_binaries = drop_binaries && is_convex_shortcut_eligible(p.utility);
    }
    out.binaries_dropped = drop_binaries && !opt.base_case;

    const double limit_factor = opt.base_case ? opt.wide_limit_factor : 1.0;
    const double v_min_sq =
        opt.base_case ? opt.wide_v_min * opt.wide_v_min : net.v_min * net.v_min;
    const double v_max_sq = net.v_max * net.v_max;
    const double v_sub_sq = net.v_substation * net.v_substation;

    double price_scale = 0.0;
    for (const ChargingPoolSpec &p : pools) {
        for (double c : p.energy_price) {
            price_scale = std::max(price_scale, c);
        }
    }
    const double asap_weight = opt.asap_eps * std::max(price_scale, 1e-3) * e_scale;

    // ---- first stage: reserves ----
    std::vector<std::vector<int>> reserve(S, std::vector<int>(T, -1));
    for (int s = 0; s < S; ++s) {
        for (int t = 0; t < T; ++t) {
            VarMeta m;
            m.role = VarRole::Reserve;
            m.pool = s;
            m.period = t;
            reserve[s][t] = prog.add_var(VarKind::Continuous, 0.0, kInf, m);
            prog.add_objective_term(reserve[s][t],
                                    -pools[s].energy_price[t] * net.delta_t * net.s_base_kw());
        }
    }

    std::vector<UtilityEncoding> encodings;
    encodings.reserve(S);
    for (int s = 0; s < S; ++s) {
        encodings.push_back(encode_utility(pools[s].utility));
    }

    // ---- second stage, grouped per scenario for a block-structured KKT ----
    for (int w = 0; w < W; ++w) {
        const double pi = scens.probabilities[w];

        std::vector<std::vector<int>> mismatch(S, std::vector<int>(T, -1));
        for (int s = 0; s < S; ++s) {
            for (int t = 0; t < T; ++t) {
                VarMeta m;
                m.role = VarRole::Mismatch;
                m.pool = s;
                m.period = t;
                m.scenario = w;
                mismatch[s][t] = prog.add_var(VarKind::Continuous, 0.0, kInf, m);
            }
        }

        std::vector<std::vector<int>> xvar(N); // [n][t - arrival]
        std::vector<int> phivar(N, -1);
        for (int n = 0; n < N; ++n) {
            const TaskRealization &r = scens.at(n, w);
            const double x_cap = net.kw_to_pu(scens.tasks[n].x_max);
            xvar[n].resize(r.departure - r.arrival);
            for (int t = r.arrival; t < r.departure; ++t) {
                VarMeta m;
                m.role = VarRole::TaskPower;
                m.pool = scens.tasks[n].pool;
                m.task = n;
                m.period = t;
                m.scenario = w;
                xvar[n][t - r.arrival] = prog.add_var(VarKind::Continuous, 0.0, x_cap, m);
                if (opt.base_case) {
                    // Earliest-period preference: reward eps*(T-t) per unit of
                    // charging power, larger for earlier periods.
                    prog.add_objective_term(xvar[n][t - r.arrival],
                                            -pi * asap_weight * static_cast<double>(T - t));
                }
            }
            VarMeta m;
            m.role = VarRole::TaskShortfall;
            m.pool = scens.tasks[n].pool;
            m.task = n;
            m.scenario = w;
            const double phi_ub = opt.base_case ? 0.0 : r.energy;
            phivar[n] = prog.add_var(VarKind::Continuous, 0.0, phi_ub, m);
        }

        std::vector<int> Phi(S, -1), Z(S, -1);
        for (int s = 0; s < S; ++s) {
            VarMeta mp;
            mp.role = VarRole::PoolShortfall;
            mp.pool = s;
            mp.scenario = w;
            const double phi_cap = opt.base_case ? 0.0 : pools[s].utility.domain_max();
            Phi[s] = prog.add_var(VarKind::Continuous, 0.0, phi_cap, mp);
            VarMeta mz;
            mz.role = VarRole::FlexCost;
            mz.pool = s;
            mz.scenario = w;
            const double z_lb = opt.base_case ? 0.0 : -kInf;
            const double z_ub = opt.base_case ? 0.0 : kInf;
            Z[s] = prog.add_var(VarKind::Continuous, z_lb, z_ub, mz);
            prog.add_objective_term(Z[s], pi);
        }

        // pool balance and cap: reserve + mismatch = sum of task draws <= cap
        for (int s = 0; s < S; ++s) {
            for (int t = 0; t < T; ++t) {
                LinearRow bal;
                bal.label = idx3("pool_bal", s, t, w);
                bal.terms.push_back({reserve[s][t], 1.0});
                bal.terms.push_back({mismatch[s][t], 1.0});
                for (int n : pool_tasks[s]) {
                    const TaskRealization &r = scens.at(n, w);
                    if (t >= r.arrival && t < r.departure) {
                        bal.terms.push_back({xvar[n][t - r.arrival], -1.0});
                    }
                }
                prog.add_eq(std::move(bal));

                LinearRow cap;
                cap.label = idx3("pool_cap", s, t, w);
                cap.terms.push_back({reserve[s][t], 1.0});
                cap.terms.push_back({mismatch[s][t], 1.0});
                cap.rhs = pools[s].p_max[t] * limit_factor;
                prog.add_ineq(std::move(cap));
            }
        }

        // task energy: requested = delivered + shortfall
        for (int n = 0; n < N; ++n) {
            const TaskRealization &r = scens.at(n, w);
            LinearRow row;
            row.label = idx2("task_energy", n, w);
            for (int t = r.arrival; t < r.departure; ++t) {
                row.terms.push_back({xvar[n][t - r.arrival], e_scale});
            }
            row.terms.push_back({phivar[n], 1.0});
            row.rhs = r.energy;
            prog.add_eq(std::move(row));
        }

        // pool shortfall aggregation
        for (int s = 0; s < S; ++s) {
            LinearRow row;
            row.label = idx2("pool_shortfall", s, w);
            row.terms.push_back({Phi[s], 1.0});
            for (int n : pool_tasks[s]) {
                row.terms.push_back({phivar[n], -1.0});
            }
            prog.add_eq(std::move(row));
        }

        // utility encodings (skipped in the base case where the shortfall is
        // pinned to zero and the cost column with it)
        if (!opt.base_case) {
            for (int s = 0; s < S; ++s) {
                const UtilityEncoding &enc = encodings[s];
                const UtilityFunction &u = pools[s].utility;
                std::vector<int> col_map(enc.num_cols, -1);
                col_map[enc.col_phi] = Phi[s];
                col_map[enc.col_cost] = Z[s];
                for (int k = 0; k <= enc.kappa; ++k) {
                    VarMeta m;
                    m.role = VarRole::WeightLo;
                    m.pool = s;
                    m.segment = k;
                    m.scenario = w;
                    col_map[enc.col_lam_lo[k]] = prog.add_var(VarKind::Continuous, 0.0, kInf, m);
                }
                for (int k = 0; k < enc.kappa; ++k) {
                    VarMeta m;
                    m.role = VarRole::WeightHi;
                    m.pool = s;
                    m.segment = k;
                    m.scenario = w;
                    col_map[enc.col_lam_hi[k]] = prog.add_var(VarKind::Continuous, 0.0, kInf, m);
                }
                if (!out.binaries_dropped) {
                    for (int k = 0; k < enc.kappa; ++k) {
                        VarMeta m;
                        m.role = VarRole::Segment;
                        m.pool = s;
                        m.segment = k + 1;
                        m.scenario = w;
                        col_map[enc.col_y[k]] = prog.add_var(VarKind::Binary, 0.0, 1.0, m);
                        conic::BinaryHint hint;
                        hint.binary_var = col_map[enc.col_y[k]];
                        hint.phi_var = Phi[s];
                        hint.phi_lo = u.alpha[k];
                        hint.phi_hi = u.alpha[k + 1];
                        hint.cost_at_lo = u.endpoint_hi(k);
                        hint.cost_at_hi = u.endpoint_lo(k + 1);
                        out.hints.push_back(hint);
                    }
                }
                for (const UtilityEncoding::Row &row : enc.rows) {
                    const bool uses_binary =
                        row.tag.rfind("segment_link", 0) == 0 || row.tag == "one_segment";
                    if (out.binaries_dropped && uses_binary) {
                        continue;
                    }
                    LinearRow lr;
                    lr.label = "util_" + row.tag + "." + std::to_string(s) + "." +
                               std::to_string(w);
                    lr.rhs = row.rhs;
                    for (auto [col, coeff] : row.coeffs) {
                        lr.terms.push_back({col_map[col], coeff});
                    }
                    if (row.is_eq) {
                        prog.add_eq(std::move(lr));
                    } else {
                        prog.add_ineq(std::move(lr));
                    }
                }
            }
        }

        // ---- network rows per period ----
        for (int t = 0; t < T; ++t) {
            std::vector<int> vsq(net.node_count(), -1);
            std::vector<int> isq(net.branch_count(), -1);
            std::vector<int> pf(net.branch_count(), -1);
            std::vector<int> qf(net.branch_count(), -1);
            for (int v = 0; v < net.node_count(); ++v) {
                if (v == net.substation) {
                    continue; // fixed at v_substation^2, folded into the rows
                }
                VarMeta m;
                m.role = VarRole::VoltSq;
                m.node = v;
                m.period = t;
                m.scenario = w;
                vsq[v] = prog.add_var(VarKind::Continuous, v_min_sq, v_max_sq, m);
            }
            for (int b = 0; b < net.branch_count(); ++b) {
                const double cap = net.branches[b].current_cap * limit_factor;
                VarMeta mi;
                mi.role = VarRole::CurrSq;
                mi.branch = b;
                mi.period = t;
                mi.scenario = w;
                isq[b] = prog.add_var(VarKind::Continuous, 0.0, cap * cap, mi);
                VarMeta mp;
                mp.role = VarRole::FlowP;
                mp.branch = b;
                mp.period = t;
                mp.scenario = w;
                pf[b] = prog.add_var(VarKind::Continuous, -kInf, kInf, mp);
                VarMeta mq;
                mq.role = VarRole::FlowQ;
                mq.branch = b;
                mq.period = t;
                mq.scenario = w;
                qf[b] = prog.add_var(VarKind::Continuous, -kInf, kInf, mq);
            }

            for (int v = 0; v < net.node_count(); ++v) {
                if (v == net.substation) {
                    continue; // the substation is the slack; its balance
                              // defines the implicit generation
                }
                LinearRow prow, qrow;
                prow.label = idx3("p_bal", v, t, w);
                qrow.label = idx3("q_bal", v, t, w);
                prow.terms.push_back({pf[net.parent_branch[v]], 1.0});
                qrow.terms.push_back({qf[net.parent_branch[v]], 1.0});
                for (int cb : net.child_branches[v]) {
                    prow.terms.push_back({pf[cb], -1.0});
                    prow.terms.push_back({isq[cb], -net.branches[cb].resistance});
                    qrow.terms.push_back({qf[cb], -1.0});
                    qrow.terms.push_back({isq[cb], -net.branches[cb].reactance});
                }
                for (int s = 0; s < S; ++s) {
                    if (pools[s].node == v) {
                        prow.terms.push_back({reserve[s][t], -1.0});
                        prow.terms.push_back({mismatch[s][t], -1.0});
                    }
                }
                prow.rhs = net.base_demand_p[v][t];
                qrow.rhs = net.base_demand_q[v][t];
                prog.add_eq(std::move(prow));
                prog.add_eq(std::move(qrow));
            }

            for (int b = 0; b < net.branch_count(); ++b) {
                const Branch &br = net.branches[b];
                LinearRow drop;
                drop.label = idx3("v_drop", b, t, w);
                drop.terms.push_back({vsq[br.to], 1.0});
                drop.terms.push_back({pf[b], 2.0 * br.resistance});
                drop.terms.push_back({qf[b], 2.0 * br.reactance});
                drop.terms.push_back(
                    {isq[b], br.resistance * br.resistance + br.reactance * br.reactance});
                if (br.from == net.substation) {
                    drop.rhs = v_sub_sq;
                } else {
                    drop.terms.push_back({vsq[br.from], -1.0});
                }
                prog.add_eq(std::move(drop));

                RotatedCone cone;
                cone.v = vsq[br.to];
                cone.i = isq[b];
                cone.p = pf[b];
                cone.q = qf[b];
                cone.branch = b;
                cone.period = t;
                cone.scenario = w;
                prog.add_rcone(cone);
            }
        }
    }

    prog.check_invariants();
    return out;
}

SopfProgram base_case_program(const NetworkModel &net, const std::vector<ChargingPoolSpec> &pools,
                              const ScenarioSet &scens, const SopfOptions &options) {
    SopfOptions opt = options;
    opt.base_case = true;
    return build_sopf(net, pools, scens, opt);
}

SopfVarMaps build_var_maps(const conic::ConicProgram &program) {
    SopfVarMaps maps;
    for (const conic::Variable &v : program.vars()) {
        const VarMeta &m = v.meta;
        maps.pools = std::max(maps.pools, m.pool + 1);
        maps.periods = std::max(maps.periods, m.period + 1);
        maps.scenarios = std::max(maps.scenarios, m.scenario + 1);
        maps.tasks = std::max(maps.tasks, m.task + 1);
        maps.nodes = std::max(maps.nodes, m.node + 1);
        maps.branches = std::max(maps.branches, m.branch + 1);
    }
    auto grid2 = [](int a, int b) {
        return std::vector<std::vector<int>>(a, std::vector<int>(b, -1));
    };
    auto grid3 = [](int a, int b, int c) {
        return std::vector<std::vector<std::vector<int>>>(
            a, std::vector<std::vector<int>>(b, std::vector<int>(c, -1)));
    };
    maps.reserve = grid2(maps.pools, maps.periods);
    maps.mismatch = grid3(maps.pools, maps.periods, maps.scenarios);
    maps.task_power = grid3(maps.tasks, maps.periods, maps.scenarios);
    maps.task_shortfall = grid2(maps.tasks, maps.scenarios);
    maps.pool_shortfall = grid2(maps.pools, maps.scenarios);
    maps.flex_cost = grid2(maps.pools, maps.scenarios);
    maps.volt_sq = grid3(maps.nodes, maps.periods, maps.scenarios);
    maps.curr_sq = grid3(maps.branches, maps.periods, maps.scenarios);
    maps.flow_p = grid3(maps.branches, maps.periods, maps.scenarios);
    maps.flow_q = grid3(maps.branches, maps.periods, maps.scenarios);

    for (int j = 0; j < program.num_vars(); ++j) {
        const VarMeta &m = program.vars()[j].meta;
        switch (m.role) {
        case VarRole::Reserve: maps.reserve[m.pool][m.period] = j; break;
        case VarRole::Mismatch: maps.mismatch[m.pool][m.period][m.scenario] = j; break;
        case VarRole::TaskPower: maps.task_power[m.task][m.period][m.scenario] = j; break;
        case VarRole::TaskShortfall: maps.task_shortfall[m.task][m.scenario] = j; break;
        case VarRole::PoolShortfall: maps.pool_shortfall[m.pool][m.scenario] = j; break;
        case VarRole::FlexCost: maps.flex_cost[m.pool][m.scenario] = j; break;
        case VarRole::VoltSq: maps.volt_sq[m.node][m.period][m.scenario] = j; break;
        case VarRole::CurrSq: maps.curr_sq[m.branch][m.period][m.scenario] = j; break;
        case VarRole::FlowP: maps.flow_p[m.branch][m.period][m.scenario] = j; break;
        case VarRole::FlowQ: maps.flow_q[m.branch][m.period][m.scenario] = j; break;
        default: break;
        }
    }
    return maps;
}

double SopfSolution::expected_flex_cost() const {
    double total = 0.0;
    for (int w = 0; w < scenarios; ++w) {
        for (int s = 0; s < pools; ++s) {
            total += probabilities[w] * flex_cost[s][w];
        }
    }
    return total;
}

SopfSolution extract_solution(const NetworkModel &net, const conic::ConicProgram &program,
                              const std::vector<double> &point,
                              const conic::SolveReport &report,
                              const std::vector<double> &probabilities, double tol) {
    if (static_cast<int>(point.size()) != program.num_vars()) {
        throw ValidationError("solution point size does not match the program");
    }

    // Every stored value must satisfy its rows and bounds; tolerances are
    // relative to the row/bound magnitude (binding constraints come back
    // from the solver tight to relative precision).
    for (const LinearRow &row : program.eq_rows()) {
        const double resid = program.row_residual(row, point);
        if (std::abs(resid) > tol * std::max(1.0, std::abs(row.rhs))) {
            std::ostringstream msg;
            msg << "solution violates equality row '" << row.label << "' by " << resid;
            throw ValidationError(msg.str());
        }
    }
    for (const LinearRow &row : program.ineq_rows()) {
        const double resid = program.row_residual(row, point);
        if (resid > tol * std::max(1.0, std::abs(row.rhs))) {
            std::ostringstream msg;
            msg << "solution violates inequality row '" << row.label << "' by " << resid;
            throw ValidationError(msg.str());
        }
    }
    for (int j = 0; j < program.num_vars(); ++j) {
        const conic::Variable &v = program.vars()[j];
        const double lo_tol = tol * std::max(1.0, std::abs(v.lb));
        const double hi_tol = tol * std::max(1.0, std::abs(v.ub) == kInf ? 1.0 : std::abs(v.ub));
        if (point[j] < v.lb - lo_tol || point[j] > v.ub + hi_tol) {
            std::ostringstream msg;
            msg << "solution violates bounds of " << program.var_name(j) << ": value "
                << point[j] << " outside [" << v.lb << ", " << v.ub << "] by "
                << std::max(v.lb - point[j], point[j] - v.ub);
            throw ValidationError(msg.str());
        }
    }

    SopfVarMaps maps = build_var_maps(program);
    SopfSolution sol;
    sol.status = report.status;
    sol.objective = report.primal_objective;
    sol.bound_gap = report.bound_gap;
    sol.heuristic = report.heuristic;
    sol.iterations = report.iterations;
    sol.bb_nodes = report.bb_nodes;
    sol.pools = maps.pools;
    sol.periods = maps.periods;
    sol.scenarios = maps.scenarios;
    sol.tasks = maps.tasks;
    sol.probabilities = probabilities;
    if (sol.probabilities.empty()) {
        sol.probabilities.assign(std::max(1, sol.scenarios),
                                 1.0 / std::max(1, sol.scenarios));
    }

    // Pool-side decisions feed the areas and payments; snap the solver's
    // sub-tolerance bound violations (e.g. -1e-13 mismatches) onto the box.
    auto value_of = [&](int var) { return var >= 0 ? point[var] : 0.0; };
    auto snapped = [&](int var) {
        if (var < 0) {
            return 0.0;
        }
        const conic::Variable &v = program.vars()[var];
        return std::clamp(point[var], v.lb, v.ub);
    };
    auto fill2s = [&](const std::vector<std::vector<int>> &idx) {
        std::vector<std::vector<double>> out(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) {
            out[a].resize(idx[a].size());
            for (std::size_t b = 0; b < idx[a].size(); ++b) {
                out[a][b] = snapped(idx[a][b]);
            }
        }
        return out;
    };
    auto fill3s = [&](const std::vector<std::vector<std::vector<int>>> &idx) {
        std::vector<std::vector<std::vector<double>>> out(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) {
            out[a].resize(idx[a].size());
            for (std::size_t b = 0; b < idx[a].size(); ++b) {
                out[a][b].resize(idx[a][b].size());
                for (std::size_t c = 0; c < idx[a][b].size(); ++c) {
                    out[a][b][c] = snapped(idx[a][b][c]);
                }
            }
        }
        return out;
    };
    auto fill2 = [&](const std::vector<std::vector<int>> &idx) {
        std::vector<std::vector<double>> out(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) {
            out[a].resize(idx[a].size());
            for (std::size_t b = 0; b < idx[a].size(); ++b) {
                out[a][b] = value_of(idx[a][b]);
            }
        }
        return out;
    };
    auto fill3 = [&](const std::vector<std::vector<std::vector<int>>> &idx) {
        std::vector<std::vector<std::vector<double>>> out(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) {
            out[a].resize(idx[a].size());
            for (std::size_t b = 0; b < idx[a].size(); ++b) {
                out[a][b].resize(idx[a][b].size());
                for (std::size_t c = 0; c < idx[a][b].size(); ++c) {
                    out[a][b][c] = value_of(idx[a][b][c]);
                }
            }
        }
        return out;
    };

    sol.reserve = fill2s(maps.reserve);
    sol.mismatch = fill3s(maps.mismatch);
    sol.task_power = fill3s(maps.task_power);
    sol.task_shortfall = fill2s(maps.task_shortfall);
    sol.pool_shortfall = fill2s(maps.pool_shortfall);
    sol.flex_cost = fill2(maps.flex_cost);
    sol.volt_sq = fill3(maps.volt_sq);
    sol.curr_sq = fill3(maps.curr_sq);
    sol.flow_p = fill3(maps.flow_p);
    sol.flow_q = fill3(maps.flow_q);

    // The substation voltage is a constant of the build.
    const double v_sub_sq = net.v_substation * net.v_substation;
    if (net.substation < static_cast<int>(sol.volt_sq.size())) {
        for (auto &per_t : sol.volt_sq[net.substation]) {
            std::fill(per_t.begin(), per_t.end(), v_sub_sq);
        }
    }

    sol.cone_gap = conic::cone_gaps(program, point);
    sol.max_cone_violation = 0.0;
    for (double g : sol.cone_gap) {
        sol.max_cone_violation = std::max(sol.max_cone_violation, -g);
    }
    if (sol.max_cone_violation > tol) {
        throw ValidationError("solution violates a rotated cone beyond tolerance");
    }
    return sol;
}

ExactnessReport check_exactness(const NetworkModel &net, const SopfSolution &sol, double tol) {
    ExactnessReport rep;
    const double v_max_sq = net.v_max * net.v_max;
    for (int b = 0; b < static_cast<int>(sol.curr_sq.size()); ++b) {
        const int to = net.branches[b].to;
        for (int t = 0; t < sol.periods; ++t) {
            for (int w = 0; w < sol.scenarios; ++w) {
                const double vi = sol.volt_sq[to][t][w] * sol.curr_sq[b][t][w];
                const double pq = sol.flow_p[b][t][w] * sol.flow_p[b][t][w] +
                                  sol.flow_q[b][t][w] * sol.flow_q[b][t][w];
                const double slack = (vi - pq) / std::max(1.0, std::abs(vi));
                rep.max_gap = std::max(rep.max_gap, slack);
                if (slack > tol) {
                    rep.gaps_above_tol.push_back({b, t, w});
                }
            }
        }
    }
    for (int v = 0; v < static_cast<int>(sol.volt_sq.size()); ++v) {
        for (int t = 0; t < sol.periods; ++t) {
            for (int w = 0; w < sol.scenarios; ++w) {
                if (sol.volt_sq[v][t][w] >= v_max_sq - tol) {
                    rep.binding_upper_voltage.push_back({v, t, w});
                }
            }
        }
    }
    return rep;
}

} // namespace flexopf
