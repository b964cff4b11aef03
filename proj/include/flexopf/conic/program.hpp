#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "flexopf/common.hpp"

namespace flexopf::conic {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };

/// Role of a variable inside the planning model; used to map solver output
/// back onto the domain objects and to synthesize stable names.
enum class VarRole {
    Reserve,       ///< pool power reserve, first stage
    Mismatch,      ///< pool consumption above the reserve
    TaskPower,     ///< per-task charging power
    TaskShortfall, ///< per-task energy not served
    PoolShortfall, ///< per-pool total energy not served
    FlexCost,      ///< per-pool cost for energy not served
    WeightLo,      ///< lower-endpoint multiplier of a utility segment
    WeightHi,      ///< upper-endpoint multiplier of a utility segment
    Segment,       ///< binary segment activation
    VoltSq,        ///< squared nodal voltage
    CurrSq,        ///< squared branch current
    FlowP,         ///< branch active power flow
    FlowQ,         ///< branch reactive power flow
    Aux,
};

struct VarMeta {
    VarRole role = VarRole::Aux;
    int pool = -1;
    int task = -1;
    int period = -1;
    int scenario = -1;
    int segment = -1;
    int node = -1;
    int branch = -1;
};

struct Variable {
    VarKind kind = VarKind::Continuous;
    double lb = -kInf;
    double ub = kInf;
    VarMeta meta;
};

struct LinearTerm {
    int var;
    double coeff;
};

struct LinearRow {
    std::vector<LinearTerm> terms;
    double rhs = 0.0;
    std::string label;
};

/// v * i >= p^2 + q^2 with v, i >= 0 (implied by the cone itself).
struct RotatedCone {
    int v = -1;
    int i = -1;
    int p = -1;
    int q = -1;
    int branch = -1;
    int period = -1;
    int scenario = -1;
};

/// Solver-independent description of the planning problem: a linear
/// objective over continuous/binary variables with linear rows and rotated
/// second-order cones. Row and variable order is deterministic, so two
/// identical builds dump byte-identically.
class ConicProgram {
  public:
    int add_var(VarKind kind, double lb, double ub, const VarMeta &meta = {});
    void add_eq(LinearRow row) { eq_rows_.push_back(std::move(row)); }
    void add_ineq(LinearRow row) { ineq_rows_.push_back(std::move(row)); }
    void add_rcone(const RotatedCone &cone) { cones_.push_back(cone); }
    void add_objective_term(int var, double coeff);
    void add_objective_constant(double c) { objective_constant_ += c; }

    int num_vars() const { return static_cast<int>(vars_.size()); }
    int num_binaries() const;
    const std::vector<Variable> &vars() const { return vars_; }
    std::vector<Variable> &vars() { return vars_; }
    const std::vector<LinearRow> &eq_rows() const { return eq_rows_; }
    const std::vector<LinearRow> &ineq_rows() const { return ineq_rows_; }
    const std::vector<RotatedCone> &cones() const { return cones_; }
    const std::vector<LinearTerm> &objective() const { return objective_; }
    double objective_constant() const { return objective_constant_; }

    std::string var_name(int v) const;
    double objective_value(const std::vector<double> &point) const;

    /// Residual of a linear row at a point (lhs - rhs).
    double row_residual(const LinearRow &row, const std::vector<double> &point) const;

    /// Verifies structural invariants: indices in range, cone members
    /// nonnegative-capable, binaries only in utility rows.
    void check_invariants() const;

    /// Writes the documented text format used to diff builds.
    void dump(std::ostream &out) const;
    std::string dump() const;

  private:
    std::vector<Variable> vars_;
    std::vector<LinearRow> eq_rows_;
    std::vector<LinearRow> ineq_rows_;
    std::vector<RotatedCone> cones_;
    std::vector<LinearTerm> objective_;
    double objective_constant_ = 0.0;
};

} // namespace flexopf::conic
