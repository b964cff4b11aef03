#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flexopf/common.hpp"

namespace flexopf {

struct Branch {
    int from = -1; ///< node index of the upstream end
    int to = -1;   ///< node index of the downstream end
    double resistance = 0.0;  ///< pu
    double reactance = 0.0;   ///< pu
    double current_cap = 0.0; ///< pu on I_base = S_base / (sqrt(3) V_base)
};

/// Radial distribution network in per-unit form. Immutable after load;
/// safe for concurrent shared reads.
struct NetworkModel {
    std::vector<std::string> node_ids;
    int substation = -1; ///< index into node_ids
    std::vector<Branch> branches;

    /// base_demand_p[node][period], pu. Same shape for reactive demand.
    std::vector<std::vector<double>> base_demand_p;
    std::vector<std::vector<double>> base_demand_q;

    double v_min = 0.95;       ///< pu
    double v_max = 1.05;       ///< pu
    double v_substation = 1.0; ///< pu, fixed
    double s_base = 1e6;       ///< VA
    double v_base = 11e3;      ///< V, line-to-line
    int periods = 24;
    double delta_t = 1.0; ///< hours per period

    std::string name;

    // Tree structure, derived on load. parent_branch[n] is the index of the
    // branch feeding node n (-1 for the substation); order_from_root lists
    // nodes so that every parent precedes its children.
    std::vector<int> parent_branch;
    std::vector<std::vector<int>> child_branches;
    std::vector<int> order_from_root;

    int node_index(const std::string &id) const;
    int node_count() const { return static_cast<int>(node_ids.size()); }
    int branch_count() const { return static_cast<int>(branches.size()); }

    double s_base_kw() const { return s_base / 1e3; }
    double z_base() const { return v_base * v_base / s_base; }
    /// Phase-current base; ampacities are line-to-line referenced.
    double i_base() const { return s_base / (1.7320508075688772 * v_base); }

    double kw_to_pu(double kw) const { return kw * 1e3 / s_base; }
    double pu_to_kw(double pu) const { return pu * s_base / 1e3; }
    double amp_to_pu(double amp) const { return amp / i_base(); }
    double pu_to_amp(double pu) const { return pu * i_base(); }
    double ohm_to_pu(double ohm) const { return ohm / z_base(); }
};

/// Outcome of the radiality check. A non-ok diagnostic names the offending
/// nodes or branches rather than throwing.
struct RadialDiagnostic {
    bool ok = true;
    std::vector<int> duplicate_branches;  ///< branch indices repeating a pair
    std::vector<int> cycle_branches;      ///< chords closing a cycle
    std::vector<int> unreachable_nodes;   ///< nodes not connected to the substation
    std::string message;
};

RadialDiagnostic validate_radial(const NetworkModel &model);

/// Loads a network JSON file, converts physical units to per-unit and checks
/// all model invariants. Throws ParseError or ValidationError.
NetworkModel load_network(const std::string &path);
NetworkModel parse_network(const std::string &json_text, const std::string &origin = "<string>");

} // namespace flexopf
