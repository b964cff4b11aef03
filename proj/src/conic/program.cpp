#include "flexopf/conic/program.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace flexopf::conic {

int ConicProgram::add_var(VarKind kind, double lb, double ub, const VarMeta &meta) {
    Variable v;
    v.kind = kind;
    v.lb = lb;
    v.ub = ub;
    v.meta = meta;
    vars_.push_back(v);
    return static_cast<int>(vars_.size()) - 1;
}

void ConicProgram::add_objective_term(int var, double coeff) {
    if (coeff != 0.0) {
        objective_.push_back({var, coeff});
    }
}

int ConicProgram::num_binaries() const {
    int n = 0;
    for (const Variable &v : vars_) {
        if (v.kind == VarKind::Binary) {
            ++n;
        }
    }
    return n;
}

namespace {

const char *role_name(VarRole r) {
    switch (r) {
    case VarRole::Reserve: return "reserve";
    case VarRole::Mismatch: return "mismatch";
    case VarRole::TaskPower: return "task_power";
    case VarRole::TaskShortfall: return "task_shortfall";
    case VarRole::PoolShortfall: return "pool_shortfall";
    case VarRole::FlexCost: return "flex_cost";
    case VarRole::WeightLo: return "weight_lo";
    case VarRole::WeightHi: return "weight_hi";
    case VarRole::Segment: return "segment";
    case VarRole::VoltSq: return "volt_sq";
    case VarRole::CurrSq: return "curr_sq";
    case VarRole::FlowP: return "flow_p";
    case VarRole::FlowQ: return "flow_q";
    case VarRole::Aux: return "aux";
    }
    return "?";
}

void append_index(std::string &s, const char *tag, int value) {
    if (value >= 0) {
        s += tag;
        s += std::to_string(value);
    }
}

std::string format_num(double v) {
    if (v == kInf) {
        return "inf";
    }
    if (v == -kInf) {
        return "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string ConicProgram::var_name(int v) const {
    const VarMeta &m = vars_[v].meta;
    std::string s = role_name(m.role);
    append_index(s, ".s", m.pool);
    append_index(s, ".n", m.task);
    append_index(s, ".k", m.segment);
    append_index(s, ".node", m.node);
    append_index(s, ".br", m.branch);
    append_index(s, ".t", m.period);
    append_index(s, ".w", m.scenario);
    return s;
}

double ConicProgram::objective_value(const std::vector<double> &point) const {
    double v = objective_constant_;
    for (const LinearTerm &term : objective_) {
        v += term.coeff * point[term.var];
    }
    return v;
}

double ConicProgram::row_residual(const LinearRow &row, const std::vector<double> &point) const {
    double v = -row.rhs;
    for (const LinearTerm &term : row.terms) {
        v += term.coeff * point[term.var];
    }
    return v;
}

void ConicProgram::check_invariants() const {
    const int n = num_vars();
    auto check_terms = [&](const LinearRow &row, bool allow_binary) {
        for (const LinearTerm &t : row.terms) {
            if (t.var < 0 || t.var >= n) {
                throw ValidationError("row '" + row.label + "' references variable out of range");
            }
            if (!std::isfinite(t.coeff)) {
                throw ValidationError("row '" + row.label + "' has a non-finite coefficient");
            }
            if (!allow_binary && vars_[t.var].kind == VarKind::Binary) {
                throw ValidationError("binary variable outside utility rows in '" + row.label +
                                      "'");
            }
        }
    };
    for (const LinearRow &row : eq_rows_) {
        const bool utility_row = row.label.rfind("util", 0) == 0;
        check_terms(row, utility_row);
    }
    for (const LinearRow &row : ineq_rows_) {
        const bool utility_row = row.label.rfind("util", 0) == 0;
        check_terms(row, utility_row);
    }
    for (const RotatedCone &c : cones_) {
        for (int idx : {c.v, c.i, c.p, c.q}) {
            if (idx < 0 || idx >= n) {
                throw ValidationError("cone references variable out of range");
            }
            if (vars_[idx].kind == VarKind::Binary) {
                throw ValidationError("cone references a binary variable");
            }
        }
        // v and i live on the nonnegative side of the cone.
        if (vars_[c.v].ub < 0 || vars_[c.i].ub < 0) {
            throw ValidationError("cone head variables must admit nonnegative values");
        }
    }
    for (const LinearTerm &t : objective_) {
        if (t.var < 0 || t.var >= n) {
            throw ValidationError("objective references variable out of range");
        }
    }
    for (const Variable &v : vars_) {
        if (v.lb > v.ub) {
            throw ValidationError("variable with empty bound interval");
        }
    }
}

void ConicProgram::dump(std::ostream &out) const {
    out << "conicprogram v1\n";
    out << "vars " << num_vars() << "\n";
    for (int v = 0; v < num_vars(); ++v) {
        out << "var " << v << ' ' << var_name(v) << ' '
            << (vars_[v].kind == VarKind::Binary ? "bin" : "cont") << ' ' << format_num(vars_[v].lb)
            << ' ' << format_num(vars_[v].ub) << "\n";
    }
    auto write_row = [&](const char *tag, const LinearRow &row) {
        out << tag << ' ' << row.label << ':';
        for (const LinearTerm &t : row.terms) {
            out << ' ' << format_num(t.coeff) << '*' << t.var;
        }
        out << (tag[0] == 'e' ? " = " : " <= ") << format_num(row.rhs) << "\n";
    };
    for (const LinearRow &row : eq_rows_) {
        write_row("eq", row);
    }
    for (const LinearRow &row : ineq_rows_) {
        write_row("ineq", row);
    }
    for (const RotatedCone &c : cones_) {
        out << "rcone " << c.v << ' ' << c.i << ' ' << c.p << ' ' << c.q << "\n";
    }
    out << "min:";
    for (const LinearTerm &t : objective_) {
        out << ' ' << format_num(t.coeff) << '*' << t.var;
    }
    if (objective_constant_ != 0.0) {
        out << " + " << format_num(objective_constant_);
    }
    out << "\n";
}

std::string ConicProgram::dump() const {
    std::ostringstream ss;
    dump(ss);
    return ss.str();
}

} // namespace flexopf::conic
