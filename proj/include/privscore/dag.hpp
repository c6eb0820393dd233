#pragma once

#include <string>
#include <utility>
#include <vector>

#include "privscore/dataset.hpp"

namespace privscore {

// Causal DAG over column names. `pa` is the protected attribute node whose
// outgoing feature edges form the privilege arrow set; `target` is the
// predicted outcome.
struct CausalDag {
  std::vector<std::string> nodes;
  std::vector<std::pair<int, int>> edges;  // (parent, child) node indices
  int pa = -1;
  int target = -1;
  double advantaged_level = 1.0;

  int node_index(const std::string& name) const;
  std::vector<int> parents(int node) const;   // ascending node index
  std::vector<int> children(int node) const;  // ascending node index
  bool has_edge(int from, int to) const;

  // Topological order of all nodes; throws InputError naming a node on a cycle.
  std::vector<int> topo_order() const;

  // All nodes reachable from `node` via directed paths (excluding itself).
  std::vector<int> descendants(int node) const;
};

// DAG file: {"nodes":[...], "edges":[["A","X1"],...], "pa":"A", "target":"Y",
// "advantaged_level":1}
CausalDag load_dag_json(const std::string& path);
CausalDag dag_from_json_text(const std::string& text);
std::string dag_to_json_text(const CausalDag& dag);

// Checks acyclicity, node/column agreement, and the partial-warping guard
// (no feature may descend from two distinct privilege arrows). Returns a
// normalized copy whose nodes are re-ordered to match the table's column
// order, so that arrow indexing is stable across runs.
CausalDag validate(const CausalDag& dag, const DatasetTable& table);

// Ordered privilege arrows: pa -> feature edges (target excluded), indexed by
// the child's position in the node order.
struct PrivilegeArrowSet {
  std::vector<int> children;  // node index of each arrow's child
  int k() const { return static_cast<int>(children.size()); }
};

PrivilegeArrowSet privilege_arrows(const CausalDag& dag);

// Topological order restricted to pa-descendant feature nodes (target
// excluded): the order in which features must be warped so parents precede
// children.
std::vector<int> warp_order(const CausalDag& dag);

// For each node: the index of the privilege arrow governing it (the unique
// arrow from whose child the node is reachable), or -1. The validate() guard
// guarantees uniqueness.
std::vector<int> governing_arrow(const CausalDag& dag);

}  // namespace privscore
