#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "privscore/models.hpp"
#include "privscore/rng.hpp"

namespace privscore {

namespace {

// Rows sorted lexicographically by (features, target, weight) so the fitted
// forest depends only on the multiset of training rows, never their order.
std::vector<int> canonical_order(const DatasetTable& table, int target_col,
                                 const std::vector<int>& feature_cols,
                                 const std::vector<double>* weights) {
  std::vector<int> order(table.n_rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int c : feature_cols) {
      const double va = table.at(a, c), vb = table.at(b, c);
      if (va != vb) return va < vb;
    }
    const double ya = table.at(a, target_col), yb = table.at(b, target_col);
    if (ya != yb) return ya < yb;
    if (weights) {
      const double wa = (*weights)[a], wb = (*weights)[b];
      if (wa != wb) return wa < wb;
    }
    return false;
  });
  return order;
}

struct BuildNode {
  int id = 0;              // index into the tree's node vector
  double m0 = 0, m1 = 0;   // class masses: sum of count*(1-y) and count*y
  long long cnt = 0;       // bootstrap sample count (m0 + m1 == cnt)
  std::uint64_t mask = 0;  // candidate-feature bitmask for this node
  bool is_leaf = false;
  int best_feat = -1;
  double best_thr = 0.0;
  double best_score = -std::numeric_limits<double>::infinity();
  int left_slot = -1;  // slot of the left child in the next level, once split
  // Running state for the current feature sweep.
  double r0 = 0, r1 = 0;
  long long rcnt = 0;
  double last = 0.0;
  bool has_last = false;
};

std::uint64_t draw_feature_mask(Rng& rng, int m, double fraction) {
  const int q = std::clamp(static_cast<int>(std::llround(fraction * m)), 1, m);
  if (q == m) return m == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::uint64_t mask = 0;
  for (int t = 0; t < q; ++t) {
    std::swap(idx[t], idx[t + static_cast<int>(rng.below(m - t))]);
    mask |= std::uint64_t{1} << idx[t];
  }
  return mask;
}

double node_score(double m0, double m1) {
  const double mass = m0 + m1;
  return mass > 0 ? (m0 * m0 + m1 * m1) / mass : 0.0;
}

// Grows one tree level by level. Each level makes a single pass per feature
// over the globally presorted row order, accumulating per-node split scores,
// so the cost is O(features × rows) per level regardless of node count.
ForestTree grow_tree(const std::vector<std::vector<double>>& feat,
                     const std::vector<double>& y,
                     const std::vector<std::vector<int>>& sorted_idx,
                     const std::vector<long long>& count, const ForestParams& params,
                     Rng& tree_rng) {
  const int m = static_cast<int>(feat.size());
  const std::size_t n = y.size();

  ForestTree tree;
  tree.nodes.push_back(ForestNode{});

  std::vector<int> slot_of_row(n, -1);
  std::vector<BuildNode> level(1);
  BuildNode& root = level[0];
  root.id = 0;
  root.mask = draw_feature_mask(tree_rng, m, params.feature_fraction);
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] == 0) continue;
    slot_of_row[i] = 0;
    const double c = static_cast<double>(count[i]);
    root.m1 += c * y[i];
    root.m0 += c * (1.0 - y[i]);
    root.cnt += count[i];
  }
  if (root.cnt == 0) {
    tree.nodes[0].value = 0.5;
    return tree;
  }

  // Out-of-bag rows never contribute to this tree; dropping them from the
  // sweep orders up front saves every later level the skip work.
  std::vector<int> in_bag;
  in_bag.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] > 0) in_bag.push_back(static_cast<int>(i));
  }
  std::vector<std::vector<int>> bag_sorted(m);
  for (int j = 0; j < m; ++j) {
    bag_sorted[j].reserve(in_bag.size());
    for (int i : sorted_idx[j]) {
      if (count[i] > 0) bag_sorted[j].push_back(i);
    }
  }

  for (int depth = 0;; ++depth) {
    bool any_split_candidate = false;
    std::uint64_t mask_union = 0;
    for (BuildNode& nb : level) {
      nb.is_leaf = depth >= params.max_depth || nb.cnt < 2LL * params.min_leaf ||
                   nb.m0 == 0.0 || nb.m1 == 0.0;
      if (!nb.is_leaf) {
        any_split_candidate = true;
        mask_union |= nb.mask;
      }
    }

    if (any_split_candidate) {
      for (int j = 0; j < m; ++j) {
        if (!((mask_union >> j) & 1)) continue;
        for (BuildNode& nb : level) {
          nb.r0 = nb.r1 = 0.0;
          nb.rcnt = 0;
          nb.has_last = false;
        }
        const std::vector<double>& fj = feat[j];
        for (int i : bag_sorted[j]) {
          const int slot = slot_of_row[i];
          if (slot < 0) continue;
          BuildNode& nb = level[slot];
          if (nb.is_leaf || !((nb.mask >> j) & 1)) continue;
          const double v = fj[i];
          if (nb.has_last && v > nb.last && nb.rcnt >= params.min_leaf &&
              nb.cnt - nb.rcnt >= params.min_leaf) {
            const double score =
                node_score(nb.r0, nb.r1) + node_score(nb.m0 - nb.r0, nb.m1 - nb.r1);
            if (score > nb.best_score) {
              nb.best_score = score;
              nb.best_feat = j;
              nb.best_thr = 0.5 * (nb.last + v);
            }
          }
          const double c = static_cast<double>(count[i]);
          nb.r1 += c * y[i];
          nb.r0 += c * (1.0 - y[i]);
          nb.rcnt += count[i];
          nb.last = v;
          nb.has_last = true;
        }
      }
    }

    // Decide splits, emit children, and finalize leaves.
    std::vector<BuildNode> next;
    for (BuildNode& nb : level) {
      const bool splits =
          !nb.is_leaf && nb.best_feat >= 0 && nb.best_score > node_score(nb.m0, nb.m1) + 1e-12;
      if (!splits) {
        nb.is_leaf = true;
        ForestNode& out = tree.nodes[nb.id];
        out.left = out.right = -1;
        out.value = nb.m1 / (nb.m0 + nb.m1);
        continue;
      }
      const int left_index = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(ForestNode{});
      tree.nodes.push_back(ForestNode{});
      ForestNode& out = tree.nodes[nb.id];
      out.feature = nb.best_feat;
      out.threshold = nb.best_thr;
      out.left = left_index;
      out.right = left_index + 1;
      BuildNode child;
      child.mask = draw_feature_mask(tree_rng, m, params.feature_fraction);
      child.id = left_index;
      next.push_back(child);
      child.mask = draw_feature_mask(tree_rng, m, params.feature_fraction);
      child.id = left_index + 1;
      next.push_back(child);
      nb.left_slot = static_cast<int>(next.size()) - 2;
    }
    if (next.empty()) break;

    // Route rows to their child node and accumulate child statistics.
    for (int i : in_bag) {
      const int slot = slot_of_row[i];
      if (slot < 0) continue;
      const BuildNode& nb = level[slot];
      if (nb.is_leaf) {
        slot_of_row[i] = -1;
        continue;
      }
      const ForestNode& out = tree.nodes[nb.id];
      const bool go_left = feat[out.feature][i] < out.threshold;
      const int child_slot = nb.left_slot + (go_left ? 0 : 1);
      slot_of_row[i] = child_slot;
      BuildNode& cb = next[child_slot];
      const double c = static_cast<double>(count[i]);
      cb.m1 += c * y[i];
      cb.m0 += c * (1.0 - y[i]);
      cb.cnt += count[i];
    }
    level = std::move(next);
  }

  return tree;
}

}  // namespace

ForestModel fit_forest_model(const DatasetTable& table, int target_col,
                             const std::vector<int>& feature_cols,
                             const std::vector<double>* weights, const ForestParams& params,
                             std::uint64_t seed) {
  const std::size_t n = table.n_rows();
  const int m = static_cast<int>(feature_cols.size());
  if (m == 0) throw std::invalid_argument("fit_forest_model: no features");
  if (m > 64) throw std::invalid_argument("fit_forest_model: more than 64 features");

  const std::vector<int> canon = canonical_order(table, target_col, feature_cols, weights);

  std::vector<std::vector<double>> feat(m, std::vector<double>(n));
  std::vector<double> y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int r = canon[i];
    for (int j = 0; j < m; ++j) feat[j][i] = table.at(r, feature_cols[j]);
    y[i] = table.at(r, target_col);
    w[i] = weights ? (*weights)[r] : 1.0;
  }

  std::vector<std::vector<int>> sorted_idx(m, std::vector<int>(n));
  for (int j = 0; j < m; ++j) {
    std::iota(sorted_idx[j].begin(), sorted_idx[j].end(), 0);
    std::stable_sort(sorted_idx[j].begin(), sorted_idx[j].end(),
                     [&](int a, int b) { return feat[j][a] < feat[j][b]; });
  }

  // Bootstrap draws are proportional to row weight, so integer-weighted rows
  // behave exactly like materialized duplicates.
  std::vector<double> cumw(n);
  double total_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] < 0) throw std::invalid_argument("fit_forest_model: negative weight");
    total_w += w[i];
    cumw[i] = total_w;
  }
  if (total_w <= 0) throw std::invalid_argument("fit_forest_model: all weights zero");
  const long long n_draws = std::llround(total_w);

  ForestModel model;
  model.params = params;
  model.trees.reserve(params.trees);
  std::vector<long long> count(n);
  for (int t = 0; t < params.trees; ++t) {
    Rng tree_rng = rng_stream(seed, {rng_tag::tree, static_cast<std::uint64_t>(t)});
    std::fill(count.begin(), count.end(), 0);
    for (long long d = 0; d < n_draws; ++d) {
      const double u = tree_rng.uniform() * total_w;
      const auto it = std::upper_bound(cumw.begin(), cumw.end(), u);
      const std::size_t pick = std::min<std::size_t>(it - cumw.begin(), n - 1);
      ++count[pick];
    }
    model.trees.push_back(grow_tree(feat, y, sorted_idx, count, params, tree_rng));
  }
  return model;
}

double forest_cv_log_loss(const DatasetTable& table, int target_col,
                          const std::vector<int>& feature_cols,
                          const std::vector<double>* weights, const ForestParams& params,
                          int folds, std::uint64_t fold_seed, std::uint64_t fit_seed) {
  const std::size_t n = table.n_rows();
  if (folds < 2) throw std::invalid_argument("forest_cv_log_loss: folds must be >= 2");
  if (n < static_cast<std::size_t>(folds)) {
    throw std::invalid_argument("forest_cv_log_loss: fewer rows than folds");
  }

  // Fold assignment shuffles canonical positions, keeping CV scores invariant
  // to input row order.
  const std::vector<int> canon = canonical_order(table, target_col, feature_cols, weights);
  std::vector<int> pos(n);
  std::iota(pos.begin(), pos.end(), 0);
  Rng fold_rng(fold_seed);
  fold_rng.shuffle(pos);
  std::vector<int> fold_of(n);  // indexed by canonical position
  for (std::size_t i = 0; i < n; ++i) fold_of[pos[i]] = static_cast<int>(i % folds);

  double loss = 0.0, total_w = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows, test_rows;
    for (std::size_t cpos = 0; cpos < n; ++cpos) {
      (fold_of[cpos] == f ? test_rows : train_rows).push_back(canon[cpos]);
    }
    DatasetTable train = table.select_rows(train_rows);
    std::vector<double> train_w;
    const std::vector<double>* train_w_ptr = nullptr;
    if (weights) {
      for (int r : train_rows) train_w.push_back((*weights)[r]);
      train_w_ptr = &train_w;
    }
    const ForestModel fold_model =
        fit_forest_model(train, target_col, feature_cols, train_w_ptr, params,
                         rng_stream(fit_seed, {static_cast<std::uint64_t>(f)}).next_u64());

    for (int r : test_rows) {
      double sum = 0.0;
      for (const ForestTree& tree : fold_model.trees) {
        int node = 0;
        while (tree.nodes[node].left >= 0) {
          const ForestNode& nd = tree.nodes[node];
          node = table.at(r, feature_cols[nd.feature]) < nd.threshold ? nd.left : nd.right;
        }
        sum += tree.nodes[node].value;
      }
      const double p = clamp_probability(sum / static_cast<double>(fold_model.trees.size()));
      const double yv = table.at(r, target_col);
      const double wv = weights ? (*weights)[r] : 1.0;
      loss -= wv * (yv * std::log(p) + (1.0 - yv) * std::log(1.0 - p));
      total_w += wv;
    }
  }
  return total_w > 0 ? loss / total_w : 0.0;
}

}  // namespace privscore
