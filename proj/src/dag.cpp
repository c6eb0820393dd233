#include "privscore/dag.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace privscore {

int CausalDag::node_index(const std::string& name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> CausalDag::parents(int node) const {
  std::vector<int> out;
  for (const auto& [p, c] : edges) {
    if (c == node) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> CausalDag::children(int node) const {
  std::vector<int> out;
  for (const auto& [p, c] : edges) {
    if (p == node) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool CausalDag::has_edge(int from, int to) const {
  for (const auto& [p, c] : edges) {
    if (p == from && c == to) return true;
  }
  return false;
}

std::vector<int> CausalDag::topo_order() const {
  // Kahn's algorithm, always emitting the smallest ready node index, so that
  // ties between unordered nodes break by node (= column) order.
  std::vector<int> indeg(nodes.size(), 0);
  for (const auto& [p, c] : edges) {
    (void)p;
    ++indeg[c];
  }
  std::set<int> ready;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (indeg[v] == 0) ready.insert(static_cast<int>(v));
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (int c : children(v)) {
      if (--indeg[c] == 0) ready.insert(c);
    }
  }
  if (order.size() != nodes.size()) {
    for (std::size_t v = 0; v < nodes.size(); ++v) {
      if (indeg[v] > 0) {
        throw InputError("cycle detected in DAG involving node '" + nodes[v] + "'");
      }
    }
  }
  return order;
}

std::vector<int> CausalDag::descendants(int node) const {
  std::set<int> seen;
  std::function<void(int)> visit = [&](int v) {
    for (int c : children(v)) {
      if (seen.insert(c).second) visit(c);
    }
  };
  visit(node);
  return {seen.begin(), seen.end()};
}

CausalDag dag_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw InputError(std::string("DAG JSON parse error: ") + e.what());
  }
  CausalDag dag;
  if (!j.contains("nodes") || !j["nodes"].is_array()) {
    throw InputError("DAG JSON needs a \"nodes\" array");
  }
  for (const auto& n : j["nodes"]) dag.nodes.push_back(n.get<std::string>());
  std::set<std::string> unique(dag.nodes.begin(), dag.nodes.end());
  if (unique.size() != dag.nodes.size()) throw InputError("DAG JSON has duplicate nodes");

  if (!j.contains("edges") || !j["edges"].is_array()) {
    throw InputError("DAG JSON needs an \"edges\" array");
  }
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2) {
      throw InputError("DAG edge entries must be [parent, child] pairs");
    }
    int p = dag.node_index(e[0].get<std::string>());
    int c = dag.node_index(e[1].get<std::string>());
    if (p < 0 || c < 0) {
      throw InputError("DAG edge references unknown node: [" + e[0].get<std::string>() +
                       ", " + e[1].get<std::string>() + "]");
    }
    dag.edges.emplace_back(p, c);
  }
  if (!j.contains("pa")) throw InputError("DAG JSON needs \"pa\"");
  if (!j.contains("target")) throw InputError("DAG JSON needs \"target\"");
  dag.pa = dag.node_index(j["pa"].get<std::string>());
  dag.target = dag.node_index(j["target"].get<std::string>());
  if (dag.pa < 0) throw InputError("DAG pa node is not in the node list");
  if (dag.target < 0) throw InputError("DAG target node is not in the node list");
  if (j.contains("advantaged_level")) dag.advantaged_level = j["advantaged_level"].get<double>();
  return dag;
}

CausalDag load_dag_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open DAG file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return dag_from_json_text(buf.str());
}

std::string dag_to_json_text(const CausalDag& dag) {
  nlohmann::json j;
  j["nodes"] = dag.nodes;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [p, c] : dag.edges) {
    edges.push_back({dag.nodes[p], dag.nodes[c]});
  }
  j["edges"] = edges;
  j["pa"] = dag.nodes[dag.pa];
  j["target"] = dag.nodes[dag.target];
  j["advantaged_level"] = dag.advantaged_level;
  return j.dump(2);
}

CausalDag validate(const CausalDag& dag, const DatasetTable& table) {
  if (dag.pa < 0 || dag.target < 0) throw InputError("DAG must declare pa and target nodes");
  dag.topo_order();  // throws on cycle

  // Node/column agreement, including role consistency for pa and target.
  for (std::size_t v = 0; v < dag.nodes.size(); ++v) {
    int c = table.column_index(dag.nodes[v]);
    if (c < 0) throw InputError("DAG node '" + dag.nodes[v] + "' has no table column");
    ColumnRole role = table.column(c).role;
    if (static_cast<int>(v) == dag.pa && role != ColumnRole::pa) {
      throw InputError("DAG pa node '" + dag.nodes[v] + "' must map to the pa column");
    }
    if (static_cast<int>(v) == dag.target && role != ColumnRole::target) {
      throw InputError("DAG target node '" + dag.nodes[v] + "' must map to the target column");
    }
  }
  if (table.pa_column() >= 0 &&
      table.column(table.pa_column()).name != dag.nodes[dag.pa]) {
    throw InputError("table pa column '" + table.column(table.pa_column()).name +
                     "' does not match DAG pa node '" + dag.nodes[dag.pa] + "'");
  }

  // Normalize node order to table column order so privilege-arrow indexing is
  // stable and matches reported column order.
  std::vector<int> order(dag.nodes.size());
  for (std::size_t v = 0; v < dag.nodes.size(); ++v) order[v] = static_cast<int>(v);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return table.column_index(dag.nodes[a]) < table.column_index(dag.nodes[b]);
  });
  std::vector<int> remap(dag.nodes.size());
  CausalDag norm;
  norm.advantaged_level = dag.advantaged_level;
  norm.nodes.resize(dag.nodes.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    remap[order[pos]] = static_cast<int>(pos);
    norm.nodes[pos] = dag.nodes[order[pos]];
  }
  for (const auto& [p, c] : dag.edges) norm.edges.emplace_back(remap[p], remap[c]);
  std::sort(norm.edges.begin(), norm.edges.end());
  norm.edges.erase(std::unique(norm.edges.begin(), norm.edges.end()), norm.edges.end());
  norm.pa = remap[dag.pa];
  norm.target = remap[dag.target];

  // Partial-warping guard: every feature may descend from at most one
  // privilege arrow; otherwise single-arrow coalitions would need partially
  // warped features, which is out of scope.
  auto arrows = privilege_arrows(norm);
  std::vector<int> owner(norm.nodes.size(), -1);
  for (int j = 0; j < arrows.k(); ++j) {
    std::vector<int> region = norm.descendants(arrows.children[j]);
    region.push_back(arrows.children[j]);
    for (int v : region) {
      if (v == norm.target) continue;
      if (owner[v] >= 0 && owner[v] != j) {
        throw InputError("partial warping required: feature '" + norm.nodes[v] +
                         "' descends from privilege arrows to '" +
                         norm.nodes[arrows.children[owner[v]]] + "' and '" +
                         norm.nodes[arrows.children[j]] + "'; such DAGs are unsupported");
      }
      owner[v] = j;
    }
  }
  return norm;
}

PrivilegeArrowSet privilege_arrows(const CausalDag& dag) {
  PrivilegeArrowSet set;
  for (int c : dag.children(dag.pa)) {
    if (c == dag.target) continue;
    set.children.push_back(c);
  }
  std::sort(set.children.begin(), set.children.end());
  return set;
}

std::vector<int> warp_order(const CausalDag& dag) {
  std::vector<int> region = dag.descendants(dag.pa);
  std::set<int> in_region(region.begin(), region.end());
  in_region.erase(dag.target);
  std::vector<int> order;
  for (int v : dag.topo_order()) {
    if (in_region.count(v)) order.push_back(v);
  }
  return order;
}

std::vector<int> governing_arrow(const CausalDag& dag) {
  auto arrows = privilege_arrows(dag);
  std::vector<int> owner(dag.nodes.size(), -1);
  for (int j = 0; j < arrows.k(); ++j) {
    owner[arrows.children[j]] = j;
    for (int v : dag.descendants(arrows.children[j])) {
      if (v != dag.target) owner[v] = j;
    }
  }
  return owner;
}

}  // namespace privscore
