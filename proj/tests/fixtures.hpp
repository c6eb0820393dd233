#pragma once

// Shared hand-built fixtures: a small mortgage-style table whose warper fits
// are saturated (so warped values are exact), plus a world-model pair with
// stored predictions that walk through every decomposition quantity.

#include <vector>

#include "privscore/dag.hpp"
#include "privscore/dataset.hpp"
#include "privscore/models.hpp"
#include "privscore/privilege.hpp"
#include "privscore/warp.hpp"

namespace fixtures {

inline std::vector<privscore::ColumnSpec> columns() {
  using privscore::ColumnKind;
  using privscore::ColumnRole;
  return {
      {"A", ColumnKind::binary, ColumnRole::pa},
      {"C", ColumnKind::numeric, ColumnRole::confounder},
      {"X1", ColumnKind::binary, ColumnRole::feature},
      {"X2", ColumnKind::binary, ColumnRole::feature},
      {"Y", ColumnKind::binary, ColumnRole::target},
  };
}

// A has only saturated logit parents (intercept + A), so the fitted group
// means equal the sample proportions: X1 shifts 0.1 -> 0.7 (+0.6) and X2
// shifts 0.3 -> 0.5 (+0.2) when A moves to the advantaged level.
inline privscore::DatasetTable table() {
  privscore::DatasetTable t(columns(), 20);
  for (std::size_t i = 0; i < 20; ++i) {
    const double a = i < 10 ? 0.0 : 1.0;
    const double x1 = a == 0.0 ? (i == 0 ? 1.0 : 0.0) : (i < 17 ? 1.0 : 0.0);
    const double x2 = a == 0.0 ? (i < 3 ? 1.0 : 0.0) : (i < 15 ? 1.0 : 0.0);
    const double y = (i % 3 == 0) ? 0.0 : 1.0;
    const double row[] = {a, 20.0 + static_cast<double>(i), x1, x2, y};
    t.set_row(i, row);
  }
  return t;
}

inline privscore::CausalDag dag() {
  privscore::CausalDag d;
  d.nodes = {"A", "C", "X1", "X2", "Y"};
  auto edge = [&](int p, int c) { d.edges.emplace_back(p, c); };
  edge(0, 2);  // A -> X1
  edge(0, 3);  // A -> X2
  edge(0, 4);  // A -> Y
  edge(2, 4);  // X1 -> Y
  edge(3, 4);  // X2 -> Y
  d.pa = 0;
  d.target = 4;
  d.advantaged_level = 1.0;
  return d;
}

// The applicant's row: disadvantaged, both features at 0. Warping moves
// (X1, X2) = (0, 0) to (0.6, 0.2).
inline std::vector<double> row() { return {0.0, 22.0, 0.0, 0.0, 0.0}; }

// Real-world model: one tree keyed to the four coalition points,
//   (0, 0) -> 0.30   (0.6, 0) -> 0.55   (0, 0.2) -> 0.42   (0.6, 0.2) -> 0.67
// so the Shapley shares come out as gamma = (-0.25, -0.12) without
// interaction. Thresholds sit far from the warped values, so warper rounding
// cannot move a point across a split.
inline privscore::FittedPredictor real_model() {
  using privscore::ForestNode;
  privscore::ForestModel m;
  m.params.trees = 1;
  privscore::ForestTree tree;
  tree.nodes.push_back(ForestNode{2, 0.3, 1, 2, 0.0});   // split on X1
  tree.nodes.push_back(ForestNode{3, 0.1, 3, 4, 0.0});   // X1 low: split on X2
  tree.nodes.push_back(ForestNode{3, 0.1, 5, 6, 0.0});   // X1 high: split on X2
  tree.nodes.push_back(ForestNode{-1, 0.0, -1, -1, 0.30});
  tree.nodes.push_back(ForestNode{-1, 0.0, -1, -1, 0.42});
  tree.nodes.push_back(ForestNode{-1, 0.0, -1, -1, 0.55});
  tree.nodes.push_back(ForestNode{-1, 0.0, -1, -1, 0.67});
  m.trees.push_back(tree);
  return privscore::FittedPredictor::make_forest({0, 1, 2, 3}, {"A", "C", "X1", "X2"},
                                                 std::move(m));
}

// Warped-world model: constant 0.97.
inline privscore::FittedPredictor warped_model() {
  privscore::ForestModel m;
  m.params.trees = 1;
  privscore::ForestTree tree;
  tree.nodes.push_back(privscore::ForestNode{-1, 0.0, -1, -1, 0.97});
  m.trees.push_back(tree);
  return privscore::FittedPredictor::make_forest({0, 1, 2, 3}, {"A", "C", "X1", "X2"},
                                                 std::move(m));
}

// Stored training means pin the global intercept at 0.8 - 0.7 = 0.1.
inline privscore::WorldModels worlds() {
  privscore::WorldModels w;
  w.real_model = real_model();
  w.warped_model = warped_model();
  w.warper = privscore::fit_warper(table(), dag());
  w.train_mean_real = 0.8;
  w.train_mean_warped = 0.7;
  return w;
}

// 41 stored bootstrap scores whose 0.025/0.975 type-7 quantiles fall exactly
// on order statistics: h = 40*0.025 = 1 and h = 40*0.975 = 39, giving the
// interval (-0.9, -0.55).
inline std::vector<double> replicates() {
  std::vector<double> r;
  r.push_back(-0.95);
  r.push_back(-0.9);
  for (int i = 0; i < 37; ++i) r.push_back(-0.88 + 0.008 * static_cast<double>(i));
  r.push_back(-0.55);
  r.push_back(-0.5);
  return r;
}

}  // namespace fixtures
