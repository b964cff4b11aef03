#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "conic/solve_impl.hpp"
#include "flexopf/conic/solver.hpp"

namespace flexopf::conic {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

void SolverOptions::check() const {
    if (feas_tol <= 0 || gap_tol <= 0 || rel_gap_tol <= 0 || bb_abs_gap <= 0 || bb_rel_gap <= 0) {
        throw ValidationError("solver tolerances must be positive");
    }
    if (max_iterations < 1 || node_limit < 1 || max_exact_binaries < 0) {
        throw ValidationError("solver iteration/node limits must be positive");
    }
    if (time_limit_s < 0) {
        throw ValidationError("time limit must be nonnegative");
    }
}

const char *to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::GapLimit: return "gap_limit";
    case SolveStatus::Numerics: return "numerics";
    }
    return "?";
}

std::string SolveReport::to_json() const {
    std::ostringstream out;
    out.precision(17);
    out << "{\n";
    out << "  \"status\": \"" << to_string(status) << "\",\n";
    out << "  \"primal_objective\": " << primal_objective << ",\n";
    out << "  \"dual_objective\": " << dual_objective << ",\n";
    out << "  \"iterations\": " << iterations << ",\n";
    out << "  \"bb_nodes\": " << bb_nodes << ",\n";
    out << "  \"bound_gap\": " << bound_gap << ",\n";
    out << "  \"best_bound\": " << best_bound << ",\n";
    out << "  \"heuristic\": " << (heuristic ? "true" : "false") << ",\n";
    out << "  \"reduced_accuracy\": " << (reduced_accuracy ? "true" : "false") << ",\n";
    out << "  \"primal_residual\": " << primal_residual << ",\n";
    out << "  \"dual_residual\": " << dual_residual << ",\n";
    out << "  \"comp_gap\": " << comp_gap << ",\n";
    out << "  \"max_cone_violation\": " << max_cone_violation << ",\n";
    out << "  \"max_row_violation\": " << max_row_violation << ",\n";
    out << "  \"message\": \"" << message << "\"\n";
    out << "}\n";
    return out.str();
}

std::vector<double> cone_gaps(const ConicProgram &program, const std::vector<double> &point) {
    std::vector<double> gaps;
    gaps.reserve(program.cones().size());
    for (const RotatedCone &c : program.cones()) {
        const double vi = point[c.v] * point[c.i];
        const double pq = point[c.p] * point[c.p] + point[c.q] * point[c.q];
        gaps.push_back((vi - pq) / std::max(1.0, std::abs(vi)));
    }
    return gaps;
}

double max_linear_violation(const ConicProgram &program, const std::vector<double> &point) {
    double worst = 0.0;
    for (const LinearRow &row : program.eq_rows()) {
        worst = std::max(worst, std::abs(program.row_residual(row, point)));
    }
    for (const LinearRow &row : program.ineq_rows()) {
        worst = std::max(worst, program.row_residual(row, point));
    }
    for (int j = 0; j < program.num_vars(); ++j) {
        const Variable &v = program.vars()[j];
        if (v.lb != -kInf) {
            worst = std::max(worst, v.lb - point[j]);
        }
        if (v.ub != kInf) {
            worst = std::max(worst, point[j] - v.ub);
        }
    }
    return worst;
}

namespace {

// ---------------------------------------------------------------------------
// Standard form: min c'x  s.t.  A x = b,  G x + s = h,  s in K,
// K = R^l_+  x  SOC_4 x ... (rotated cones mapped via (v+i, v-i, 2p, 2q)).
// Variables fixed by equal bounds are substituted out first.
// ---------------------------------------------------------------------------
struct StandardForm {
    int n = 0;
    int p = 0;
    int m = 0;
    int l = 0;
    std::vector<int> cone_dims;
    SpMat A, G;
    VectorXd b, h, c;
    double obj_offset = 0.0;
    std::vector<int> reduced_of_orig; // -1 when fixed
    std::vector<double> fixed_value;  // valid where reduced_of_orig == -1
    std::optional<std::string> trivially_infeasible;
};

StandardForm build_standard_form(const ConicProgram &prog, bool relax_binaries) {
    const int n_orig = prog.num_vars();
    StandardForm sf;
    sf.reduced_of_orig.assign(n_orig, -1);
    sf.fixed_value.assign(n_orig, 0.0);

    for (int j = 0; j < n_orig; ++j) {
        const Variable &v = prog.vars()[j];
        if (v.kind == VarKind::Binary && !relax_binaries && v.lb != v.ub) {
            throw SolveError("solve_socp: program has unfixed binary variables");
        }
        if (v.lb > v.ub) {
            sf.trivially_infeasible = "variable with empty bounds: " + prog.var_name(j);
            return sf;
        }
        if (v.lb == v.ub) {
            sf.fixed_value[j] = v.lb;
        } else {
            sf.reduced_of_orig[j] = sf.n++;
        }
    }

    sf.c = VectorXd::Zero(sf.n);
    sf.obj_offset = prog.objective_constant();
    for (const LinearTerm &t : prog.objective()) {
        const int r = sf.reduced_of_orig[t.var];
        if (r >= 0) {
            sf.c[r] += t.coeff;
        } else {
            sf.obj_offset += t.coeff * sf.fixed_value[t.var];
        }
    }

    std::vector<Triplet> ta, tg;
    std::vector<double> bs, hs;

    auto reduce_row = [&](const LinearRow &row, std::vector<std::pair<int, double>> &terms,
                          double &rhs) {
        rhs = row.rhs;
        terms.clear();
        for (const LinearTerm &t : row.terms) {
            const int r = sf.reduced_of_orig[t.var];
            if (r >= 0) {
                terms.push_back({r, t.coeff});
            } else {
                rhs -= t.coeff * sf.fixed_value[t.var];
            }
        }
    };

    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
    for (const LinearRow &row : prog.eq_rows()) {
        reduce_row(row, terms, rhs);
        if (terms.empty()) {
            if (std::abs(rhs) > 1e-9) {
                sf.trivially_infeasible = "equality row '" + row.label + "' reduces to 0 = " +
                                          std::to_string(rhs);
                return sf;
            }
            continue;
        }
        for (auto [var, coeff] : terms) {
            ta.push_back({static_cast<int>(bs.size()), var, coeff});
        }
        bs.push_back(rhs);
    }
    sf.p = static_cast<int>(bs.size());

    int g_row = 0;
    auto push_g = [&](const std::vector<std::pair<int, double>> &ts, double rv) {
        for (auto [var, coeff] : ts) {
            tg.push_back({g_row, var, coeff});
        }
        hs.push_back(rv);
        ++g_row;
    };

    for (const LinearRow &row : prog.ineq_rows()) {
        reduce_row(row, terms, rhs);
        if (terms.empty()) {
            if (rhs < -1e-9) {
                sf.trivially_infeasible = "inequality row '" + row.label + "' reduces to 0 <= " +
                                          std::to_string(rhs);
                return sf;
            }
            continue;
        }
        push_g(terms, rhs);
    }
    for (int j = 0; j < n_orig; ++j) {
        const int r = sf.reduced_of_orig[j];
        if (r < 0) {
            continue;
        }
        const Variable &v = prog.vars()[j];
        if (v.ub != kInf) {
            push_g({{r, 1.0}}, v.ub);
        }
        if (v.lb != -kInf) {
            push_g({{r, -1.0}}, -v.lb);
        }
    }
    sf.l = g_row;

    // Rotated cone (v, i, p, q): slack block s = (v+i, v-i, 2p, 2q) lies in a
    // standard second-order cone; fixed members fold into h.
    auto cone_row = [&](std::initializer_list<std::pair<int, double>> members) {
        double cst = 0.0;
        std::vector<std::pair<int, double>> ts;
        for (auto [var, coeff] : members) {
            const int r = sf.reduced_of_orig[var];
            if (r >= 0) {
                ts.push_back({r, -coeff}); // s = h - G x
            } else {
                cst += coeff * sf.fixed_value[var];
            }
        }
        // Merge duplicate columns (v == i is legal).
        std::sort(ts.begin(), ts.end());
        std::vector<std::pair<int, double>> merged;
        for (auto &t : ts) {
            if (!merged.empty() && merged.back().first == t.first) {
                merged.back().second += t.second;
            } else {
                merged.push_back(t);
            }
        }
        push_g(merged, cst);
    };
    for (const RotatedCone &c : prog.cones()) {
        cone_row({{c.v, 1.0}, {c.i, 1.0}});
        cone_row({{c.v, 1.0}, {c.i, -1.0}});
        cone_row({{c.p, 2.0}});
        cone_row({{c.q, 2.0}});
        sf.cone_dims.push_back(4);
    }
    sf.m = g_row;

    sf.A.resize(sf.p, sf.n);
    sf.A.setFromTriplets(ta.begin(), ta.end());
    sf.G.resize(sf.m, sf.n);
    sf.G.setFromTriplets(tg.begin(), tg.end());
    sf.b = Eigen::Map<VectorXd>(bs.data(), bs.size());
    sf.h = Eigen::Map<VectorXd>(hs.data(), hs.size());
    return sf;
}

// ---------------------------------------------------------------------------
// Interior-point solver on the homogeneous self-dual embedding.
// ---------------------------------------------------------------------------
struct IpmResult {
    SolveStatus status = SolveStatus::Numerics;
    VectorXd x, y, z, s;
    double tau = 1.0;
    double kap = 1.0;
    int iterations = 0;
    double pres = 0.0, dres = 0.0, gap = 0.0;
    double pcost = 0.0, dcost = 0.0;
    bool reduced_accuracy = false;
    std::string message;
};

class Ipm {
  public:
    Ipm(StandardForm sf, const SolverOptions &opts) : sf_(std::move(sf)), opts_(opts) {
        n_ = sf_.n;
        p_ = sf_.p;
        m_ = sf_.m;
        l_ = sf_.l;
        nsoc_ = static_cast<int>(sf_.cone_dims.size());
        degree_ = l_ + nsoc_;
        dim_ = n_ + p_ + m_;
    }

    IpmResult run();

    // Undoes the equilibration on a packed (x, y, z, s) iterate.
    void unscale_point(IpmResult &r) const {
        r.x = r.x.cwiseQuotient(e_x_);
        r.y = r.y.cwiseQuotient(e_a_);
        r.z = r.z.cwiseQuotient(e_g_);
        r.s = r.s.cwiseProduct(e_g_);
    }

  private:
    struct SocScaling {
        double eta = 1.0;
        double eta2 = 1.0;
        double a = 1.0;
        VectorXd q; // dim-1
    };

    void equilibrate();
    void setup_kkt();
    void set_identity_scaling_values();
    void update_scaling_values();
    bool update_scalings(const VectorXd &s, const VectorXd &z);
    void scale(const VectorXd &z, VectorXd &out) const;   // out = W z
    void w2_apply(const VectorXd &z, VectorXd &out) const; // out = W'W z
    void conic_product(const VectorXd &u, const VectorXd &v, VectorXd &out) const;
    void conic_division(const VectorXd &u, const VectorXd &w, VectorXd &out) const;
    void bring_to_cone(const VectorXd &r, VectorXd &s) const;
    double line_search(const VectorXd &lambda, const VectorXd &ds, const VectorXd &dz, double tau,
                       double dtau, double kap, double dkap) const;
    int solve_kkt(const VectorXd &rhs, VectorXd &dx, VectorXd &dy, VectorXd &dz, bool init) const;

    StandardForm sf_;
    SolverOptions opts_;
    int n_ = 0, p_ = 0, m_ = 0, l_ = 0, nsoc_ = 0, degree_ = 0, dim_ = 0;

    VectorXd e_x_, e_a_, e_g_; // equilibration scalings
    SpMat At_, Gt_;
    SpMat K_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Upper> ldlt_;
    std::vector<double *> lp_slots_;                // diagonal of orthant block
    std::vector<std::array<double *, 10>> soc_slots_; // upper triangle per cone

    VectorXd lp_w2_;                 // s_i / z_i on the orthant
    std::vector<SocScaling> socs_;

    static constexpr double kDeltaStat = 7e-8;
    static constexpr double kStepMax = 0.999;
    static constexpr double kStepMin = 1e-6;
    static constexpr double kGammaStep = 0.99;
    static constexpr double kSafeguard = 500.0;
    static constexpr int kMaxRefine = 4;
};

void Ipm::equilibrate() {
    e_x_ = VectorXd::Ones(n_);
    e_a_ = VectorXd::Ones(p_);
    e_g_ = VectorXd::Ones(m_);

    auto sqrt_or_one = [](double v) { return v < 1e-6 ? 1.0 : std::sqrt(v); };

    for (int iter = 0; iter < 3; ++iter) {
        VectorXd cx = VectorXd::Zero(n_);
        VectorXd ra = VectorXd::Zero(p_);
        VectorXd rg = VectorXd::Zero(m_);
        for (int j = 0; j < sf_.A.outerSize(); ++j) {
            for (SpMat::InnerIterator it(sf_.A, j); it; ++it) {
                cx[j] = std::max(cx[j], std::abs(it.value()));
                ra[it.row()] = std::max(ra[it.row()], std::abs(it.value()));
            }
        }
        for (int j = 0; j < sf_.G.outerSize(); ++j) {
            for (SpMat::InnerIterator it(sf_.G, j); it; ++it) {
                cx[j] = std::max(cx[j], std::abs(it.value()));
                rg[it.row()] = std::max(rg[it.row()], std::abs(it.value()));
            }
        }
        // Rows of one cone must share a single scale to keep the cone shape.
        int at = l_;
        for (int dim : sf_.cone_dims) {
            const double block = rg.segment(at, dim).maxCoeff();
            rg.segment(at, dim).setConstant(block);
            at += dim;
        }
        cx = cx.unaryExpr(sqrt_or_one);
        ra = ra.unaryExpr(sqrt_or_one);
        rg = rg.unaryExpr(sqrt_or_one);

        for (int j = 0; j < sf_.A.outerSize(); ++j) {
            for (SpMat::InnerIterator it(sf_.A, j); it; ++it) {
                it.valueRef() /= ra[it.row()] * cx[j];
            }
        }
        for (int j = 0; j < sf_.G.outerSize(); ++j) {
            for (SpMat::InnerIterator it(sf_.G, j); it; ++it) {
                it.valueRef() /= rg[it.row()] * cx[j];
            }
        }
        e_x_ = e_x_.cwiseProduct(cx);
        e_a_ = e_a_.cwiseProduct(ra);
        e_g_ = e_g_.cwiseProduct(rg);
    }
    sf_.c = sf_.c.cwiseQuotient(e_x_);
    sf_.b = sf_.b.cwiseQuotient(e_a_);
    sf_.h = sf_.h.cwiseQuotient(e_g_);
}

void Ipm::setup_kkt() {
    At_ = sf_.A.transpose();
    Gt_ = sf_.G.transpose();

    // Upper triangle of
    //   [ dI   A'      G'     ]
    //   [ A   -dI      0      ]
    //   [ G    0   -(W'W+dI)  ]
    std::vector<Triplet> trips;
    trips.reserve(n_ + p_ + sf_.A.nonZeros() + sf_.G.nonZeros() + l_ + 10 * nsoc_);
    for (int j = 0; j < n_; ++j) {
        trips.push_back({j, j, kDeltaStat});
    }
    for (int r = 0; r < p_; ++r) {
        trips.push_back({n_ + r, n_ + r, -kDeltaStat});
    }
    for (int j = 0; j < sf_.A.outerSize(); ++j) {
        for (SpMat::InnerIterator it(sf_.A, j); it; ++it) {
            trips.push_back({j, n_ + static_cast<int>(it.row()), it.value()});
        }
    }
    for (int j = 0; j < sf_.G.outerSize(); ++j) {
        for (SpMat::InnerIterator it(sf_.G, j); it; ++it) {
            trips.push_back({j, n_ + p_ + static_cast<int>(it.row()), it.value()});
        }
    }
    for (int i = 0; i < l_; ++i) {
        trips.push_back({n_ + p_ + i, n_ + p_ + i, -(1.0 + kDeltaStat)});
    }
    int at = l_;
    for (int dim : sf_.cone_dims) {
        for (int r = 0; r < dim; ++r) {
            for (int c = r; c < dim; ++c) {
                const double v = (r == c) ? -(1.0 + kDeltaStat) : -1e-300;
                trips.push_back({n_ + p_ + at + r, n_ + p_ + at + c, v});
            }
        }
        at += dim;
    }
    K_.resize(dim_, dim_);
    K_.setFromTriplets(trips.begin(), trips.end());
    K_.makeCompressed();

    lp_slots_.resize(l_);
    for (int i = 0; i < l_; ++i) {
        lp_slots_[i] = &K_.coeffRef(n_ + p_ + i, n_ + p_ + i);
    }
    soc_slots_.resize(nsoc_);
    at = l_;
    for (int ci = 0; ci < nsoc_; ++ci) {
        int slot = 0;
        const int dim = sf_.cone_dims[ci];
        for (int r = 0; r < dim; ++r) {
            for (int c = r; c < dim; ++c) {
                soc_slots_[ci][slot++] = &K_.coeffRef(n_ + p_ + at + r, n_ + p_ + at + c);
            }
        }
        at += dim;
    }

    ldlt_.analyzePattern(K_);
}

void Ipm::set_identity_scaling_values() {
    for (int i = 0; i < l_; ++i) {
        *lp_slots_[i] = -(1.0 + kDeltaStat);
    }
    for (int ci = 0; ci < nsoc_; ++ci) {
        const int dim = sf_.cone_dims[ci];
        int slot = 0;
        for (int r = 0; r < dim; ++r) {
            for (int c = r; c < dim; ++c) {
                (*soc_slots_[ci][slot++]) = (r == c) ? -(1.0 + kDeltaStat) : 0.0;
            }
        }
    }
}

void Ipm::update_scaling_values() {
    for (int i = 0; i < l_; ++i) {
        *lp_slots_[i] = -(lp_w2_[i] + kDeltaStat);
    }
    // W'W for a second-order cone is eta^2 (2 wbar wbar' - J).
    for (int ci = 0; ci < nsoc_; ++ci) {
        const SocScaling &sc = socs_[ci];
        const int dim = sf_.cone_dims[ci];
        int slot = 0;
        for (int r = 0; r < dim; ++r) {
            for (int c = r; c < dim; ++c) {
                const double wr = (r == 0) ? sc.a : sc.q[r - 1];
                const double wc = (c == 0) ? sc.a : sc.q[c - 1];
                double v = 2.0 * wr * wc;
                if (r == c) {
                    v += (r == 0) ? -1.0 : 1.0;
                }
                v = -sc.eta2 * v;
                if (r == c) {
                    v -= kDeltaStat;
                }
                (*soc_slots_[ci][slot++]) = v;
            }
        }
    }
}

bool Ipm::update_scalings(const VectorXd &s, const VectorXd &z) {
    lp_w2_ = s.head(l_).cwiseQuotient(z.head(l_));
    if (l_ > 0 && !(lp_w2_.minCoeff() > 0)) {
        return false;
    }
    socs_.resize(nsoc_);
    int at = l_;
    for (int ci = 0; ci < nsoc_; ++ci) {
        const int dim = sf_.cone_dims[ci];
        SocScaling &sc = socs_[ci];
        const double sres = s[at] * s[at] - s.segment(at + 1, dim - 1).squaredNorm();
        const double zres = z[at] * z[at] - z.segment(at + 1, dim - 1).squaredNorm();
        if (sres <= 0 || zres <= 0) {
            return false;
        }
        const double snorm = std::sqrt(sres);
        const double znorm = std::sqrt(zres);
        const VectorXd sbar = s.segment(at, dim) / snorm;
        const VectorXd zbar = z.segment(at, dim) / znorm;
        sc.eta2 = snorm / znorm;
        sc.eta = std::sqrt(sc.eta2);
        double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        sc.a = (0.5 / gamma) * (sbar[0] + zbar[0]);
        sc.q = (0.5 / gamma) * (sbar.tail(dim - 1) - zbar.tail(dim - 1));
        at += dim;
    }
    return true;
}

void Ipm::scale(const VectorXd &z, VectorXd &out) const {
    out.resize(m_);
    out.head(l_) = lp_w2_.cwiseSqrt().cwiseProduct(z.head(l_));
    int at = l_;
    for (int ci = 0; ci < nsoc_; ++ci) {
        const SocScaling &sc = socs_[ci];
        const int dim = sf_.cone_dims[ci];
        const double zeta = sc.q.dot(z.segment(at + 1, dim - 1));
        const double factor = z[at] + zeta / (1.0 + sc.a);
        out[at] = sc.eta * (sc.a * z[at] + zeta);
        out.segment(at + 1, dim - 1) = sc.eta * (z.segment(at + 1, dim - 1) + factor * sc.q);
        at += dim;
    }
}

void Ipm::w2_apply(const VectorXd &z, VectorXd &out) const {
    out.resize(m_);
    out.head(l_) = lp_w2_.cwiseProduct(z.head(l_));
    int at = l_;
    for (int ci = 0; ci < nsoc_; ++ci) {
        const SocScaling &sc = socs_[ci];
        const int dim = sf_.cone_dims[ci];
        const double wz = sc.a * z[at] + sc.q.dot(z.segment(at + 1, dim - 1));
        out[at] = sc.eta2 * (2.0 * sc.a * wz - z[at]);
        out.segment(at + 1, dim - 1) =
            sc.eta2 * (2.0 * wz * sc.q + z.segment(at + 1, dim - 1));
        at += dim;
    }
}

void Ipm::conic_product(const VectorXd &u, const VectorXd &v, VectorXd &out) const {
    out.resize(m_);
    out.head(l_) = u.head(l_).cwiseProduct(v.head(l_));
    int at = l_;
    for (int ci = 0; ci < nsoc_; ++ci) {
        const int dim = sf_.cone_dims[ci];
        out[at] = u.segment(at, dim).dot(v.segment(at, dim));
        out.segment(at + 1, dim - 1) =
            u[at] * v.segment(at + 1, dim - 1) + v[at] * u.segment(at + 1, dim - 1);
        at += dim;
    }
}

void Ipm::conic_division(const VectorXd &u, const VectorXd &w, VectorXd &out) const {
    out.resize(m_);
    out.head(l_) = w.head(l_).cwiseQuotient(u.head(l_));
    int at = l_;
    for (int ci = 0; ci < nsoc_; ++ci) {
        const int dim = sf_.cone_dims[ci];
        const double u0 = u[at];
        const double w0 = w[at];
        const double rho = u0 * u0 - u.segment(at + 1, dim - 1).squaredNorm();
        const double zeta = u.segment(at + 1, dim - 1).dot(w.segment(at + 1, dim - 1));
        const double factor = (zeta / u0 - w0) / rho;
        out[at] = (u0 * w0 - zeta) / rho;
        out.segment(at + 1, dim - 1) =
            factor * u.segment(at + 1, dim - 1) + w.segment(at + 1, dim - 1) / u0;
        at += dim;
    }
}

void Ipm::bring_to_cone(const VectorXd &r, VectorXd &s) const {
    double alpha = -0.99;
    for (int i = 0; i < l_; ++i) {
        if (r[i] <= 0 && -r[i] > alpha) {
            alpha = -r[i];
        }
    }
    int at = l_;
    for (int ci = 0; ci < nsoc_; ++ci) {
        const int dim = sf_.cone_dims[ci];
        const double cres = r[at] - r.segment(at + 1, dim - 1).norm();
        if (cres <= 0 && -cres > alpha) {
            alpha = -cres;
        }
        at += dim;
    }
    alpha += 1.0;
    s = r;
    s.head(l_).array() += alpha;
    at = l_;
    for (int ci = 0; ci < nsoc_; ++ci) {
        s[at] += alpha;
        at += sf_.cone_dims[ci];
    }
}

double Ipm::line_search(const VectorXd &lambda, const VectorXd &ds, const VectorXd &dz,
                        double tau, double dtau, double kap, double dkap) const {
    double alpha = 10.0;
    if (l_ > 0) {
        const double rhomin = (ds.head(l_).cwiseQuotient(lambda.head(l_))).minCoeff();
        const double sigmamin = (dz.head(l_).cwiseQuotient(lambda.head(l_))).minCoeff();
        const double worst = std::min(rhomin, sigmamin);
        alpha = worst < 0 ? 1.0 / (-worst) : 1.0 / 1e-13;
    }
    const double tau_step = -tau / dtau;
    const double kap_step = -kap / dkap;
    if (tau_step > 0 && tau_step < alpha) {
        alpha = tau_step;
    }
    if (kap_step > 0 && kap_step < alpha) {
        alpha = kap_step;
    }

    int at = l_;
    for (int ci = 0; ci < nsoc_; ++ci) {
        const int dim = sf_.cone_dims[ci];
        const double lk2 =
            lambda[at] * lambda[at] - lambda.segment(at + 1, dim - 1).squaredNorm();
        if (lk2 <= 0) {
            at += dim;
            continue;
        }
        const double lknorm = std::sqrt(lk2);
        VectorXd lkbar = lambda.segment(at, dim) / lknorm;
        const double lknorminv = 1.0 / lknorm;

        const double lds =
            lkbar[0] * ds[at] - lkbar.tail(dim - 1).dot(ds.segment(at + 1, dim - 1));
        const double ldz =
            lkbar[0] * dz[at] - lkbar.tail(dim - 1).dot(dz.segment(at + 1, dim - 1));

        VectorXd rho(dim);
        rho[0] = lknorminv * lds;
        double factor = (lds + ds[at]) / (lkbar[0] + 1.0);
        rho.tail(dim - 1) =
            lknorminv * (ds.segment(at + 1, dim - 1) - factor * lkbar.tail(dim - 1));
        const double rhonorm = rho.tail(dim - 1).norm() - rho[0];

        VectorXd sig(dim);
        sig[0] = lknorminv * ldz;
        factor = (ldz + dz[at]) / (lkbar[0] + 1.0);
        sig.tail(dim - 1) =
            lknorminv * (dz.segment(at + 1, dim - 1) - factor * lkbar.tail(dim - 1));
        const double signorm = sig.tail(dim - 1).norm() - sig[0];

        const double conic_step = std::max({0.0, rhonorm, signorm});
        if (conic_step != 0.0) {
            alpha = std::min(alpha, 1.0 / conic_step);
        }
        at += dim;
    }
    return std::clamp(alpha, kStepMin, kStepMax);
}

int Ipm::solve_kkt(const VectorXd &rhs, VectorXd &dx, VectorXd &dy, VectorXd &dz,
                   bool init) const {
    VectorXd sol = ldlt_.solve(rhs);
    const double threshold = (1.0 + rhs.lpNorm<Eigen::Infinity>()) * 1e-14;

    const auto bx = rhs.head(n_);
    const auto by = rhs.segment(n_, p_);
    const auto bz = rhs.tail(m_);

    double prev_err = std::numeric_limits<double>::max();
    VectorXd correction(dim_);
    int refinements = 0;
    for (int it = 0; it <= kMaxRefine; ++it) {
        const auto sx = sol.head(n_);
        const auto sy = sol.segment(n_, p_);
        const auto sz = sol.tail(m_);

        // Residual against the unregularized KKT system.
        VectorXd ex = bx - Gt_ * sz;
        if (p_ > 0) {
            ex -= At_ * sy;
        }
        VectorXd ey = by - sf_.A * sx;
        VectorXd ez = bz - sf_.G * sx;
        if (init) {
            ez += sz;
        } else {
            VectorXd w2z;
            w2_apply(sz, w2z);
            ez += w2z;
        }
        const double err = std::max({ex.lpNorm<Eigen::Infinity>(),
                                     p_ > 0 ? ey.lpNorm<Eigen::Infinity>() : 0.0,
                                     ez.lpNorm<Eigen::Infinity>()});
        if (err < threshold || err >= prev_err || it == kMaxRefine) {
            if (err >= prev_err && it > 0) {
                sol -= correction; // undo a refinement that made things worse
            }
            break;
        }
        prev_err = err;
        VectorXd resid(dim_);
        resid << ex, ey, ez;
        correction = ldlt_.solve(resid);
        sol += correction;
        ++refinements;
    }
    dx = sol.head(n_);
    dy = sol.segment(n_, p_);
    dz = sol.tail(m_);
    return refinements;
}

IpmResult Ipm::run() {
    IpmResult res;
    equilibrate();
    setup_kkt();

    set_identity_scaling_values();
    ldlt_.factorize(K_);
    if (ldlt_.info() != Eigen::Success) {
        res.status = SolveStatus::Numerics;
        res.message = "initial KKT factorization failed";
        return res;
    }

    VectorXd rhs1(dim_), rhs2(dim_);
    rhs1.setZero();
    rhs1.segment(n_, p_) = sf_.b;
    rhs1.tail(m_) = sf_.h;
    rhs2.setZero();
    rhs2.head(n_) = -sf_.c;

    VectorXd dx1(n_), dy1(p_), dz1(m_);
    VectorXd dx2(n_), dy2(p_), dz2(m_);

    solve_kkt(rhs1, dx1, dy1, dz1, true);
    VectorXd x = dx1;
    VectorXd s(m_);
    bring_to_cone(-dz1, s);

    solve_kkt(rhs2, dx2, dy2, dz2, true);
    VectorXd y = dy2;
    VectorXd z(m_);
    bring_to_cone(dz2, z);

    rhs1.head(n_) = -sf_.c;

    double tau = 1.0;
    double kap = 1.0;

    const double resx0 = std::max(1.0, sf_.c.norm());
    const double resy0 = std::max(1.0, sf_.b.norm());
    const double resz0 = std::max(1.0, sf_.h.norm());

    VectorXd lambda(m_), rx(n_), ry(p_), rz(m_);
    VectorXd W_dz(m_), ds_by_W(m_), dsvec(m_), ds1(m_), ds2(m_);

    IpmResult best;
    bool have_best = false;
    double best_score = std::numeric_limits<double>::max();
    double pres_prev = std::numeric_limits<double>::max();
    double step = 0.0;

    auto record = [&](IpmResult &out, SolveStatus status, int iter, double pres, double dres,
                      double gap, double pcost, double dcost) {
        out.status = status;
        out.x = x;
        out.y = y;
        out.z = z;
        out.s = s;
        out.tau = tau;
        out.kap = kap;
        out.iterations = iter;
        out.pres = pres;
        out.dres = dres;
        out.gap = gap;
        out.pcost = pcost;
        out.dcost = dcost;
    };

    for (int iter = 0; iter <= opts_.max_iterations; ++iter) {
        // Residuals of the homogeneous embedding.
        rx = -(Gt_ * z);
        if (p_ > 0) {
            rx -= At_ * y;
        }
        const double hresx = rx.norm();
        rx -= tau * sf_.c;
        double hresy = 0.0;
        if (p_ > 0) {
            ry = sf_.A * x;
            hresy = ry.norm();
            ry -= tau * sf_.b;
        } else {
            ry.resize(0);
        }
        rz = s + sf_.G * x;
        const double hresz = rz.norm();
        rz -= tau * sf_.h;

        const double cx = sf_.c.dot(x);
        const double by = p_ > 0 ? sf_.b.dot(y) : 0.0;
        const double hz = sf_.h.dot(z);
        const double rt = kap + cx + by + hz;

        const double nx = x.norm(), ny = y.norm(), nz = z.norm(), ns = s.norm();
        const double gap = s.dot(z);
        const double mu = (gap + kap * tau) / (degree_ + 1);
        const double pcost = cx / tau;
        const double dcost = -(hz + by) / tau;
        double relgap = std::numeric_limits<double>::quiet_NaN();
        if (pcost < 0) {
            relgap = gap / (-pcost);
        } else if (dcost > 0) {
            relgap = gap / dcost;
        }
        const double nry = p_ > 0 ? ry.norm() / std::max(resy0 + nx, 1.0) : 0.0;
        const double nrz = rz.norm() / std::max(resz0 + nx + ns, 1.0);
        const double pres = std::max(nry, nrz) / tau;
        const double dres = rx.norm() / std::max(resx0 + ny + nz, 1.0) / tau;

        double pinfres = std::numeric_limits<double>::quiet_NaN();
        double dinfres = std::numeric_limits<double>::quiet_NaN();
        if ((hz + by) / std::max(ny + nz, 1.0) < -opts_.rel_gap_tol) {
            pinfres = hresx / std::max(ny + nz, 1.0);
        }
        if (cx / std::max(nx, 1.0) < -opts_.rel_gap_tol) {
            dinfres = std::max(hresy / std::max(nx, 1.0), hresz / std::max(nx + ns, 1.0));
        }

        if (opts_.verbose) {
            std::printf("it %3d  pcost %+.6e dcost %+.6e gap %.2e pres %.2e dres %.2e "
                        "k/t %.2e mu %.2e step %.4f\n",
                        iter, pcost, dcost, gap, pres, dres, kap / tau, mu, step);
        }

        auto check_exit = [&](double feastol, double abstol, double reltol) -> SolveStatus {
            if ((-cx > 0 || -by - hz >= -abstol) && pres < feastol && dres < feastol &&
                (gap < abstol || (std::isfinite(relgap) && relgap < reltol))) {
                return SolveStatus::Optimal;
            }
            if (std::isfinite(dinfres) && dinfres < feastol && tau < kap) {
                return SolveStatus::Unbounded;
            }
            if (std::isfinite(pinfres) && pinfres < feastol &&
                (tau < kap || (tau < feastol && kap < feastol))) {
                return SolveStatus::Infeasible;
            }
            return SolveStatus::Numerics; // not converged yet
        };

        // Safeguard: a blown-up residual or negative gap means the last step
        // was bad; fall back to the best iterate seen.
        if (iter > 0 && (pres > kSafeguard * pres_prev || gap < 0)) {
            if (have_best) {
                res = best;
                res.reduced_accuracy = true;
                res.status = res.pres < 1e-4 && res.dres < 1e-4 ? SolveStatus::Optimal
                                                                : SolveStatus::Numerics;
                res.message = "recovered best iterate after unreliable direction";
                return res;
            }
            record(res, SolveStatus::Numerics, iter, pres, dres, gap, pcost, dcost);
            res.message = "unreliable search direction";
            return res;
        }
        pres_prev = pres;

        SolveStatus status = check_exit(opts_.feas_tol, opts_.gap_tol, opts_.rel_gap_tol);
        if (status != SolveStatus::Numerics) {
            record(res, status, iter, pres, dres, gap, pcost, dcost);
            return res;
        }
        if (iter == opts_.max_iterations) {
            status = check_exit(1e-4, 5e-5, 5e-5);
            record(res, status == SolveStatus::Numerics ? SolveStatus::IterationLimit : status,
                   iter, pres, dres, gap, pcost, dcost);
            res.reduced_accuracy = true;
            res.message = "iteration limit reached";
            return res;
        }

        // Track the best iterate by a simple merit of residuals and gap.
        const double score = pres + dres + std::abs(gap) / std::max(1.0, std::abs(pcost));
        if (!have_best || score < best_score) {
            record(best, SolveStatus::Numerics, iter, pres, dres, gap, pcost, dcost);
            best_score = score;
            have_best = true;
        }

        if (!update_scalings(s, z)) {
            res = best;
            res.reduced_accuracy = true;
            res.status = res.pres < 1e-4 && res.dres < 1e-4 ? SolveStatus::Optimal
                                                            : SolveStatus::Numerics;
            res.message = "slack or multiplier left the cone";
            return res;
        }
        scale(z, lambda);
        update_scaling_values();
        ldlt_.factorize(K_);
        if (ldlt_.info() != Eigen::Success) {
            res = best;
            res.status = SolveStatus::Numerics;
            res.message = "KKT factorization failed";
            return res;
        }

        solve_kkt(rhs1, dx1, dy1, dz1, false);
        const double dtau_denom = kap / tau - sf_.c.dot(dx1) - (p_ > 0 ? sf_.b.dot(dy1) : 0.0) -
                                  sf_.h.dot(dz1);

        // Affine (predictor) direction.
        rhs2.head(n_) = rx;
        rhs2.segment(n_, p_) = -ry;
        rhs2.tail(m_) = s - rz;
        solve_kkt(rhs2, dx2, dy2, dz2, false);

        const double dtauaff = (rt - kap + sf_.c.dot(dx2) + (p_ > 0 ? sf_.b.dot(dy2) : 0.0) +
                                sf_.h.dot(dz2)) /
                               dtau_denom;
        dz2 += dtauaff * dz1;
        scale(dz2, W_dz);
        ds_by_W = -W_dz - lambda;
        const double dkapaff = -kap - kap / tau * dtauaff;

        const double step_aff = line_search(lambda, ds_by_W, W_dz, tau, dtauaff, kap, dkapaff);
        const double sigma = std::clamp(std::pow(1.0 - step_aff, 3.0), 1e-4, 0.99);

        // Combined (corrector) direction. ds_target is the value the scaled
        // complementarity products should move toward; centrality correctors
        // below refine it with additional back-solves on the same factors.
        VectorXd ds_target(m_);
        conic_product(lambda, lambda, ds_target);
        conic_product(ds_by_W, W_dz, ds2);
        const double sigmamu = sigma * mu;
        ds_target += ds2;
        ds_target.head(l_).array() -= sigmamu;
        {
            int at = l_;
            for (int ci = 0; ci < nsoc_; ++ci) {
                ds_target[at] -= sigmamu;
                at += sf_.cone_dims[ci];
            }
        }
        const double bkap = kap * tau + dkapaff * dtauaff - sigmamu;
        const double one_minus_sigma = 1.0 - sigma;

        double dtau = 0.0, dkap = 0.0;
        auto build_direction = [&](const VectorXd &target) {
            conic_division(lambda, target, ds_by_W);
            scale(ds_by_W, ds1); // ds1 = W (lambda \ target)
            rhs2.head(n_) = one_minus_sigma * rx;
            rhs2.segment(n_, p_) = -one_minus_sigma * ry;
            rhs2.tail(m_) = -one_minus_sigma * rz + ds1;
            solve_kkt(rhs2, dx2, dy2, dz2, false);
            dtau = (one_minus_sigma * rt - bkap / tau + sf_.c.dot(dx2) +
                    (p_ > 0 ? sf_.b.dot(dy2) : 0.0) + sf_.h.dot(dz2)) /
                   dtau_denom;
            dx2 += dtau * dx1;
            if (p_ > 0) {
                dy2 += dtau * dy1;
            }
            dz2 += dtau * dz1;
            scale(dz2, W_dz);
            ds_by_W = -(ds_by_W + W_dz); // = W^{-T} ds of the full direction
            dkap = -(bkap + kap * dtau) / tau;
            return line_search(lambda, ds_by_W, W_dz, tau, dtau, kap, dkap);
        };

        const double alpha = build_direction(ds_target);

        step = kGammaStep * alpha;
        if (step <= kStepMin * kGammaStep * 1.0000001 && iter > 0) {
            res = best;
            res.reduced_accuracy = true;
            res.status = res.pres < 1e-4 && res.dres < 1e-4 ? SolveStatus::Optimal
                                                            : SolveStatus::Numerics;
            res.message = "no further progress (step length at minimum)";
            return res;
        }
        scale(ds_by_W, dsvec);

        x += step * dx2;
        if (p_ > 0) {
            y += step * dy2;
        }
        z += step * dz2;
        s += step * dsvec;
        kap += step * dkap;
        tau += step * dtau;
    }

    res.status = SolveStatus::IterationLimit;
    return res;
}

} // namespace

std::pair<std::vector<double>, SolveReport> solve_socp_impl(const ConicProgram &program,
                                                            const SolverOptions &opts,
                                                            bool relax_binaries,
                                                            bool throw_on_failure) {
    opts.check();
    StandardForm sf = build_standard_form(program, relax_binaries);

    SolveReport report;
    std::vector<double> point(program.num_vars(), 0.0);

    if (sf.trivially_infeasible) {
        report.status = SolveStatus::Infeasible;
        report.message = *sf.trivially_infeasible;
        if (throw_on_failure) {
            throw SolveError("infeasible: " + report.message);
        }
        return {point, report};
    }

    // Nothing left to optimize: the presolved point is the solution.
    if (sf.n == 0) {
        for (int j = 0; j < program.num_vars(); ++j) {
            point[j] = sf.fixed_value[j];
        }
        report.status = SolveStatus::Optimal;
        report.primal_objective = program.objective_value(point);
        report.dual_objective = report.primal_objective;
        report.max_cone_violation = 0.0;
        for (double g : cone_gaps(program, point)) {
            report.max_cone_violation = std::max(report.max_cone_violation, -g);
        }
        report.max_row_violation = max_linear_violation(program, point);
        if (report.max_row_violation > opts.feas_tol * 100 ||
            report.max_cone_violation > opts.feas_tol * 100) {
            report.status = SolveStatus::Infeasible;
            report.message = "fully fixed program violates constraints";
            if (throw_on_failure) {
                throw SolveError("infeasible: " + report.message);
            }
        }
        return {point, report};
    }

    const std::vector<int> reduced_of_orig = sf.reduced_of_orig;
    const std::vector<double> fixed_value = sf.fixed_value;
    const double obj_offset = sf.obj_offset;

    Ipm ipm(std::move(sf), opts);
    IpmResult r = ipm.run();
    report.iterations = r.iterations;
    report.reduced_accuracy = r.reduced_accuracy;
    report.message = r.message;
    report.status = r.status;
    report.comp_gap = r.gap;
    report.primal_residual = r.pres;
    report.dual_residual = r.dres;

    if (r.status == SolveStatus::Optimal) {
        ipm.unscale_point(r);
        for (int j = 0; j < program.num_vars(); ++j) {
            const int rj = reduced_of_orig[j];
            point[j] = rj >= 0 ? r.x[rj] / r.tau : fixed_value[j];
        }
        report.primal_objective = program.objective_value(point);
        report.dual_objective = r.dcost + obj_offset;
        for (double g : cone_gaps(program, point)) {
            report.max_cone_violation = std::max(report.max_cone_violation, -g);
        }
        report.max_row_violation = max_linear_violation(program, point);
    } else if (throw_on_failure) {
        throw SolveError(std::string("conic solve failed: ") + to_string(r.status) +
                         (r.message.empty() ? "" : " (" + r.message + ")"));
    }
    return {point, report};
}

std::pair<std::vector<double>, SolveReport> solve_socp(const ConicProgram &program,
                                                       const SolverOptions &opts,
                                                       bool throw_on_failure) {
    return solve_socp_impl(program, opts, /*relax_binaries=*/false, throw_on_failure);
}

} // namespace flexopf::conic
