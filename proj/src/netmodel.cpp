#include "flexopf/netmodel.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace flexopf {

using nlohmann::json;

int NetworkModel::node_index(const std::string &id) const {
    for (int i = 0; i < node_count(); ++i) {
        if (node_ids[i] == id) {
            return i;
        }
    }
    return -1;
}

RadialDiagnostic validate_radial(const NetworkModel &model) {
    RadialDiagnostic diag;
    const int n = model.node_count();

    std::set<std::pair<int, int>> seen;
    for (int b = 0; b < model.branch_count(); ++b) {
        auto key = std::minmax(model.branches[b].from, model.branches[b].to);
        if (!seen.insert(key).second) {
            diag.duplicate_branches.push_back(b);
        }
    }

    // Union-find over the branch list; a branch joining two already-connected
    // nodes closes a cycle.
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) {
        parent[i] = i;
    }
    auto find = [&](int v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    for (int b = 0; b < model.branch_count(); ++b) {
        int a = find(model.branches[b].from);
        int c = find(model.branches[b].to);
        if (a == c) {
            diag.cycle_branches.push_back(b);
        } else {
            parent[a] = c;
        }
    }
    const int root = find(model.substation);
    for (int i = 0; i < n; ++i) {
        if (find(i) != root) {
            diag.unreachable_nodes.push_back(i);
        }
    }

    diag.ok = diag.duplicate_branches.empty() && diag.cycle_branches.empty() &&
              diag.unreachable_nodes.empty() && model.branch_count() == n - 1;

    if (!diag.ok) {
        std::ostringstream msg;
        msg << "network is not a tree rooted at " << model.node_ids[model.substation] << ":";
        for (int b : diag.duplicate_branches) {
            msg << " duplicate branch (" << model.node_ids[model.branches[b].from] << ","
                << model.node_ids[model.branches[b].to] << ");";
        }
        for (int b : diag.cycle_branches) {
            msg << " cycle closed by (" << model.node_ids[model.branches[b].from] << ","
                << model.node_ids[model.branches[b].to] << ");";
        }
        for (int v : diag.unreachable_nodes) {
            msg << " unreachable node " << model.node_ids[v] << ";";
        }
        diag.message = msg.str();
    }
    return diag;
}

namespace {

// Orients every branch away from the substation and fills the traversal
// structures. Assumes validate_radial passed.
void build_tree(NetworkModel &m) {
    const int n = m.node_count();
    std::vector<std::vector<std::pair<int, int>>> adj(n); // (neighbor, branch)
    for (int b = 0; b < m.branch_count(); ++b) {
        adj[m.branches[b].from].push_back({m.branches[b].to, b});
        adj[m.branches[b].to].push_back({m.branches[b].from, b});
    }
    m.parent_branch.assign(n, -1);
    m.child_branches.assign(n, {});
    m.order_from_root.clear();
    m.order_from_root.reserve(n);

    std::vector<bool> visited(n, false);
    std::deque<int> queue{m.substation};
    visited[m.substation] = true;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        m.order_from_root.push_back(v);
        for (auto [u, b] : adj[v]) {
            if (visited[u]) {
                continue;
            }
            visited[u] = true;
            if (m.branches[b].from != v) {
                std::swap(m.branches[b].from, m.branches[b].to);
            }
            m.parent_branch[u] = b;
            m.child_branches[v].push_back(b);
            queue.push_back(u);
        }
    }
}

double require_number(const json &j, const std::string &key, const std::string &where) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ParseError("network file: missing numeric field '" + key + "' in " + where);
    }
    return j[key].get<double>();
}

} // namespace

NetworkModel parse_network(const std::string &json_text, const std::string &origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception &e) {
        throw ParseError("network file " + origin + ": " + e.what());
    }

    NetworkModel m;
    m.name = doc.value("name", origin);

    if (!doc.contains("bases") || !doc.contains("limits") || !doc.contains("nodes") ||
        !doc.contains("branches") || !doc.contains("substation")) {
        throw ParseError("network file " + origin +
                         ": requires 'nodes', 'branches', 'substation', 'bases', 'limits'");
    }
    m.s_base = require_number(doc["bases"], "s_base_va", "bases");
    m.v_base = require_number(doc["bases"], "v_base_v", "bases");
    m.v_min = require_number(doc["limits"], "v_min_pu", "limits");
    m.v_max = require_number(doc["limits"], "v_max_pu", "limits");
    m.v_substation = doc["limits"].value("v_substation_pu", 1.0);

    const json &horizon = doc.contains("horizon") ? doc["horizon"] : json::object();
    m.periods = horizon.value("periods", 24);
    m.delta_t = horizon.value("delta_t_hours", 1.0);

    if (m.s_base <= 0 || m.v_base <= 0) {
        throw ValidationError("network bases must be positive");
    }
    if (m.periods < 1 || m.delta_t <= 0) {
        throw ValidationError("horizon must have periods >= 1 and delta_t > 0");
    }
    if (!(0 < m.v_min && m.v_min < m.v_substation && m.v_substation <= m.v_max)) {
        throw ValidationError("voltage limits must satisfy 0 < v_min < v_substation <= v_max");
    }

    for (const auto &nid : doc["nodes"]) {
        m.node_ids.push_back(nid.get<std::string>());
    }
    {
        std::set<std::string> uniq(m.node_ids.begin(), m.node_ids.end());
        if (uniq.size() != m.node_ids.size()) {
            throw ValidationError("duplicate node id in network file");
        }
    }
    m.substation = m.node_index(doc["substation"].get<std::string>());
    if (m.substation < 0) {
        throw ValidationError("unknown substation node '" + doc["substation"].get<std::string>() +
                              "'");
    }

    for (const auto &jb : doc["branches"]) {
        Branch b;
        b.from = m.node_index(jb.at("from").get<std::string>());
        b.to = m.node_index(jb.at("to").get<std::string>());
        if (b.from < 0 || b.to < 0) {
            throw ValidationError("branch references unknown node");
        }
        if (b.from == b.to) {
            throw ValidationError("branch with identical endpoints " + m.node_ids[b.from]);
        }
        const std::string z_unit = jb.value("impedance_unit", "pu");
        b.resistance = require_number(jb, "r", "branch");
        b.reactance = require_number(jb, "x", "branch");
        if (z_unit == "ohm") {
            b.resistance = m.ohm_to_pu(b.resistance);
            b.reactance = m.ohm_to_pu(b.reactance);
        } else if (z_unit != "pu") {
            throw ParseError("branch impedance_unit must be 'ohm' or 'pu'");
        }
        const std::string i_unit = jb.value("ampacity_unit", "pu");
        b.current_cap = require_number(jb, "ampacity", "branch");
        if (i_unit == "amp") {
            b.current_cap = m.amp_to_pu(b.current_cap);
        } else if (i_unit != "pu") {
            throw ParseError("branch ampacity_unit must be 'amp' or 'pu'");
        }
        if (b.resistance < 0 || b.reactance < 0 || (b.resistance == 0 && b.reactance == 0)) {
            throw ValidationError("branch (" + m.node_ids[b.from] + "," + m.node_ids[b.to] +
                                  ") needs resistance > 0 or reactance > 0");
        }
        if (b.current_cap <= 0) {
            throw ValidationError("branch (" + m.node_ids[b.from] + "," + m.node_ids[b.to] +
                                  ") needs a positive ampacity");
        }
        m.branches.push_back(b);
    }

    const int n = m.node_count();
    m.base_demand_p.assign(n, std::vector<double>(m.periods, 0.0));
    m.base_demand_q.assign(n, std::vector<double>(m.periods, 0.0));
    if (doc.contains("demand_profiles")) {
        const json &dp = doc["demand_profiles"];
        const std::string p_unit = dp.value("p_unit", "pu");
        const std::string q_unit = dp.value("q_unit", "pu");
        auto read_profiles = [&](const char *key, const std::string &unit,
                                 std::vector<std::vector<double>> &out) {
            if (!dp.contains(key)) {
                return;
            }
            for (const auto &[nid, arr] : dp[key].items()) {
                int v = m.node_index(nid);
                if (v < 0) {
                    throw ValidationError("demand profile for unknown node '" + nid + "'");
                }
                if (!arr.is_array() || static_cast<int>(arr.size()) != m.periods) {
                    throw ParseError("demand profile for node '" + nid + "' must have " +
                                     std::to_string(m.periods) + " entries");
                }
                for (int t = 0; t < m.periods; ++t) {
                    double val = arr[t].get<double>();
                    if (unit == "kw") {
                        val = m.kw_to_pu(val);
                    } else if (unit != "pu") {
                        throw ParseError("demand unit must be 'kw' or 'pu'");
                    }
                    if (val < 0) {
                        throw ValidationError("negative demand at node '" + nid + "', period " +
                                              std::to_string(t));
                    }
                    out[v][t] = val;
                }
            }
        };
        read_profiles("p", p_unit, m.base_demand_p);
        read_profiles("q", q_unit, m.base_demand_q);
    }

    RadialDiagnostic diag = validate_radial(m);
    if (!diag.ok) {
        throw ValidationError(diag.message);
    }
    build_tree(m);
    return m;
}

NetworkModel load_network(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open network file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str(), path);
}

} // namespace flexopf
