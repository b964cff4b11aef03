#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>

#include "conic/solve_impl.hpp"
#include "flexopf/conic/solver.hpp"

namespace flexopf::conic {

namespace {

constexpr double kIntTol = 1e-6;

struct Fix {
    int var;
    double value;
};

struct Node {
    double bound = -kInf;
    int id = 0;
    std::vector<Fix> fixes;
};

struct NodeOrder {
    bool operator()(const Node &a, const Node &b) const {
        if (a.bound != b.bound) {
            return a.bound > b.bound; // min-heap on bound
        }
        return a.id > b.id; // deterministic tie-break
    }
};

void apply_fixes(ConicProgram &work, const std::vector<int> &binaries,
                 const std::vector<Fix> &fixes) {
    for (int var : binaries) {
        work.vars()[var].lb = 0.0;
        work.vars()[var].ub = 1.0;
    }
    for (const Fix &f : fixes) {
        work.vars()[f.var].lb = f.value;
        work.vars()[f.var].ub = f.value;
    }
}

/// Groups binaries that share an at-most-one row, so fixing one to 1 can
/// propagate zeros to its siblings. Hints map each binary to the energy
/// variable of its pool/scenario block; metadata is the fallback.
std::map<int, std::vector<int>> build_groups(const ConicProgram &program,
                                             const std::vector<int> &binaries,
                                             const std::vector<BinaryHint> &hints) {
    std::map<int, int> group_of;
    for (const BinaryHint &h : hints) {
        if (h.binary_var >= 0 && h.phi_var >= 0) {
            group_of[h.binary_var] = h.phi_var;
        }
    }
    std::map<int, std::vector<int>> groups;
    int synthetic = -1;
    for (int var : binaries) {
        auto it = group_of.find(var);
        int key;
        if (it != group_of.end()) {
            key = it->second;
        } else {
            const VarMeta &m = program.vars()[var].meta;
            if (m.role == VarRole::Segment && m.pool >= 0 && m.scenario >= 0) {
                key = 1000000000 + m.pool * 100000 + m.scenario;
            } else {
                key = synthetic--;
            }
        }
        groups[key].push_back(var);
    }
    return groups;
}

std::vector<Fix> heuristic_fixes(const ConicProgram &program, const std::vector<int> &binaries,
                                 const std::vector<BinaryHint> &hints,
                                 const std::vector<double> &relaxed) {
    std::map<int, const BinaryHint *> hint_of;
    for (const BinaryHint &h : hints) {
        hint_of[h.binary_var] = &h;
    }
    std::map<int, std::vector<int>> groups = build_groups(program, binaries, hints);

    std::vector<Fix> fixes;
    fixes.reserve(binaries.size());
    for (const auto &[key, members] : groups) {
        (void)key;
        const BinaryHint *any_hint = nullptr;
        for (int var : members) {
            if (hint_of.count(var)) {
                any_hint = hint_of[var];
            }
        }
        if (any_hint == nullptr) {
            // No interval information: round the relaxation.
            for (int var : members) {
                fixes.push_back({var, relaxed[var] > 0.5 ? 1.0 : 0.0});
            }
            continue;
        }
        const double phi = relaxed[any_hint->phi_var];
        double domain = 0.0;
        for (int var : members) {
            if (hint_of.count(var)) {
                domain = std::max(domain, hint_of[var]->phi_hi);
            }
        }
        const double eps = 1e-9 * std::max(1.0, domain);

        int active = -1;
        if (phi > eps) {
            double best_cost = kInf;
            for (int var : members) {
                const BinaryHint *h = hint_of.count(var) ? hint_of[var] : nullptr;
                if (h == nullptr) {
                    continue;
                }
                if (phi > h->phi_lo + eps && phi <= h->phi_hi + eps) {
                    // Interpolated segment cost at phi; ties at breakpoints go
                    // to the cheaper adjoining segment.
                    const double w = (phi - h->phi_lo) / (h->phi_hi - h->phi_lo);
                    const double cost = (1.0 - w) * h->cost_at_lo + w * h->cost_at_hi;
                    if (cost < best_cost - 1e-12) {
                        best_cost = cost;
                        active = var;
                    }
                }
            }
        }
        for (int var : members) {
            fixes.push_back({var, var == active ? 1.0 : 0.0});
        }
    }
    std::sort(fixes.begin(), fixes.end(), [](const Fix &a, const Fix &b) { return a.var < b.var; });
    return fixes;
}

} // namespace

std::pair<std::vector<double>, SolveReport> solve_misocp(const ConicProgram &program,
                                                         const SolverOptions &opts,
                                                         const std::vector<BinaryHint> &hints) {
    opts.check();
    const auto t_start = std::chrono::steady_clock::now();
    auto out_of_time = [&]() {
        if (opts.time_limit_s <= 0) {
            return false;
        }
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t_start;
        return dt.count() > opts.time_limit_s;
    };

    std::vector<int> binaries;
    for (int j = 0; j < program.num_vars(); ++j) {
        const Variable &v = program.vars()[j];
        if (v.kind == VarKind::Binary && v.lb != v.ub) {
            binaries.push_back(j);
        }
    }
    if (binaries.empty()) {
        auto [point, report] = solve_socp_impl(program, opts, true, true);
        report.best_bound = report.primal_objective;
        report.bb_nodes = 0;
        return {point, report};
    }

    const bool use_heuristic =
        opts.heuristic_only || static_cast<int>(binaries.size()) > opts.max_exact_binaries;

    ConicProgram work = program;

    if (use_heuristic) {
        auto [relaxed, relax_report] = solve_socp_impl(work, opts, true, false);
        if (relax_report.status == SolveStatus::Infeasible) {
            throw SolveError("MISOCP infeasible (relaxation has no feasible point)");
        }
        if (relax_report.status != SolveStatus::Optimal) {
            throw SolveError(std::string("MISOCP relaxation failed: ") +
                             to_string(relax_report.status));
        }
        const double bound = relax_report.primal_objective;

        std::vector<Fix> fixes = heuristic_fixes(program, binaries, hints, relaxed);
        apply_fixes(work, binaries, fixes);
        auto [point, report] = solve_socp_impl(work, opts, true, true);

        report.heuristic = true;
        report.bb_nodes = 2;
        report.iterations += relax_report.iterations;
        report.best_bound = bound;
        report.bound_gap = report.primal_objective - bound;
        const double target =
            std::max(opts.bb_abs_gap, opts.bb_rel_gap * std::abs(report.primal_objective));
        if (report.bound_gap > target) {
            report.status = SolveStatus::GapLimit;
            report.message = "heuristic incumbent; bound gap not proven closed";
        }
        if (!opts.heuristic_only) {
            report.message = "binary count " + std::to_string(binaries.size()) +
                             " exceeds exact limit " + std::to_string(opts.max_exact_binaries) +
                             "; used fix-and-resolve heuristic";
        }
        return {point, report};
    }

    // Exact best-first branch and bound. Nodes re-solve the continuous
    // relaxation from scratch; subproblems are small by the binary cap.
    std::map<int, std::vector<int>> groups = build_groups(program, binaries, hints);
    std::map<int, int> group_key_of;
    for (const auto &[key, members] : groups) {
        for (int var : members) {
            group_key_of[var] = key;
        }
    }

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    int next_id = 0;
    open.push({-kInf, next_id++, {}});

    double incumbent = kInf;
    std::vector<double> incumbent_point;
    SolveReport incumbent_report;
    int nodes_explored = 0;
    int total_iterations = 0;
    double best_open_bound = -kInf;
    SolveStatus exhaust_status = SolveStatus::Optimal;

    while (!open.empty()) {
        const double gap_target =
            std::max(opts.bb_abs_gap, opts.bb_rel_gap * std::abs(incumbent));
        Node node = open.top();
        best_open_bound = node.bound;
        if (node.bound >= incumbent - gap_target) {
            break; // best-first: every open node is already within the gap
        }
        if (nodes_explored >= opts.node_limit) {
            exhaust_status = SolveStatus::NodeLimit;
            break;
        }
        if (out_of_time()) {
            exhaust_status = SolveStatus::TimeLimit;
            break;
        }
        open.pop();

        apply_fixes(work, binaries, node.fixes);
        auto [point, report] = solve_socp_impl(work, opts, true, false);
        ++nodes_explored;
        total_iterations += report.iterations;
        if (report.status == SolveStatus::Infeasible) {
            continue;
        }
        if (report.status != SolveStatus::Optimal) {
            // Treat an unsolved node conservatively: keep its parent bound.
            continue;
        }
        const double value = report.primal_objective;
        if (value >= incumbent - opts.bb_abs_gap * 0.01) {
            continue;
        }

        // Most fractional branching, ties by lowest variable index.
        int branch_var = -1;
        double best_frac = kIntTol;
        for (int var : binaries) {
            const double y = point[var];
            const double frac = std::min(y, 1.0 - y);
            if (frac > best_frac) {
                best_frac = frac;
                branch_var = var;
            }
        }
        if (branch_var < 0) {
            incumbent = value;
            incumbent_point = point;
            incumbent_report = report;
            continue;
        }

        Node up;
        up.bound = value;
        up.id = next_id++;
        up.fixes = node.fixes;
        up.fixes.push_back({branch_var, 1.0});
        for (int sibling : groups[group_key_of[branch_var]]) {
            if (sibling != branch_var) {
                up.fixes.push_back({sibling, 0.0});
            }
        }
        Node down;
        down.bound = value;
        down.id = next_id++;
        down.fixes = node.fixes;
        down.fixes.push_back({branch_var, 0.0});
        open.push(std::move(up));
        open.push(std::move(down));
    }

    if (incumbent_point.empty()) {
        if (exhaust_status != SolveStatus::Optimal) {
            throw SolveError("branch and bound hit its limits without an incumbent");
        }
        throw SolveError("MISOCP infeasible (no leaf admits a feasible point)");
    }

    SolveReport report = incumbent_report;
    report.bb_nodes = nodes_explored;
    report.iterations = total_iterations;
    const double bound = open.empty() ? incumbent : std::min(best_open_bound, incumbent);
    report.best_bound = bound;
    report.bound_gap = incumbent - bound;
    report.heuristic = false;
    if (exhaust_status != SolveStatus::Optimal) {
        report.status = exhaust_status;
        report.message = "returning incumbent with unproven gap";
    } else {
        report.status = SolveStatus::Optimal;
    }
    return {incumbent_point, report};
}

} // namespace flexopf::conic
