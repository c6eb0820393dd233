#include "privscore/warp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "privscore/special.hpp"

namespace privscore {

namespace {

// Parent values as the model will see them: already-warped parents from the
// working row, with the protected attribute forced to the advantaged level.
bool warped_parents_equal_real(const FittedGlm& model, std::span<const double> real,
                               const std::vector<double>& working, int pa_col,
                               double advantaged) {
  for (int p : model.parent_cols) {
    const double warped_value = p == pa_col ? advantaged : working[p];
    if (warped_value != real[p]) return false;
  }
  return true;
}

double mu_at_warped_parents(const FittedGlm& model, const std::vector<double>& working,
                            int pa_col, double advantaged) {
  double eta = model.coef[0];
  for (std::size_t j = 0; j < model.parent_cols.size(); ++j) {
    const int p = model.parent_cols[j];
    eta += model.coef[j + 1] * (p == pa_col ? advantaged : working[p]);
  }
  if (model.family == GlmFamily::binomial_logit) return 1.0 / (1.0 + std::exp(-eta));
  return std::exp(eta);
}

}  // namespace

const FittedGlm& Warper::feature_model(int feature_col) const {
  for (std::size_t i = 0; i < warp_sequence_.size(); ++i) {
    if (warp_sequence_[i] == feature_col) return feature_models_[i];
  }
  throw std::invalid_argument("no warp model for column '" +
                              dag_.nodes[feature_col] + "'");
}

std::vector<double> Warper::warp_row(std::span<const double> row, Coalition s) const {
  std::vector<double> working(row.begin(), row.end());
  const int pa_col = dag_.pa;
  const double advantaged = dag_.advantaged_level;

  for (std::size_t i = 0; i < warp_sequence_.size(); ++i) {
    if (!s.contains(arrow_of_feature_[i])) continue;
    const int col = warp_sequence_[i];
    const FittedGlm& model = feature_models_[i];

    // Advantaged rows (and anything whose warped parents coincide with the
    // real ones) must come back bit-identical, not merely close.
    if (warped_parents_equal_real(model, row, working, pa_col, advantaged)) continue;

    const double mu_real = model.mu(row);
    const double mu_warped = mu_at_warped_parents(model, working, pa_col, advantaged);
    if (model.family == GlmFamily::binomial_logit) {
      working[col] = row[col] - mu_real + mu_warped;
    } else {
      // Quantile preservation within the fitted gamma family: same shape on
      // both sides, means from the real and warped parents.
      const double shape = 1.0 / std::max(model.dispersion, 1e-12);
      const double u = gamma_cdf(row[col], shape, mu_real / shape);
      working[col] = gamma_quantile(u, shape, mu_warped / shape);
    }
  }
  return working;
}

DatasetTable Warper::warp_training_set(const DatasetTable& train) const {
  DatasetTable warped(train.columns(), train.n_rows());
  const Coalition all = Coalition::full(k());
  const int pa_col = dag_.pa;
  const int target_col = dag_.target;
  const double advantaged = dag_.advantaged_level;

  std::vector<double> row(train.columns().size());
  for (std::size_t r = 0; r < train.n_rows(); ++r) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = train.at(r, c);
    std::vector<double> out = warp_row(row, all);

    if (warped_parents_equal_real(target_model_, row, out, pa_col, advantaged)) {
      out[target_col] = row[target_col];
    } else {
      const double mu_real = target_model_.mu(row);
      const double mu_warped = mu_at_warped_parents(target_model_, out, pa_col, advantaged);
      out[target_col] = std::clamp(row[target_col] - mu_real + mu_warped, 0.0, 1.0);
    }
    warped.set_row(r, out);
  }
  return warped;
}

Warper fit_warper(const DatasetTable& train, const CausalDag& dag) {
  Warper w;
  w.dag_ = dag;
  w.arrows_ = privilege_arrows(dag);
  w.warp_sequence_ = warp_order(dag);
  const std::vector<int> governing = governing_arrow(dag);

  // Keep only features governed by some privilege arrow; a descendant
  // reachable solely through the target cannot be moved by any coalition.
  std::erase_if(w.warp_sequence_, [&](int col) { return governing[col] < 0; });

  w.arrow_of_feature_.reserve(w.warp_sequence_.size());
  w.feature_models_.reserve(w.warp_sequence_.size());
  for (int col : w.warp_sequence_) {
    w.arrow_of_feature_.push_back(governing[col]);
    const GlmFamily family = train.columns()[col].kind == ColumnKind::binary
                                 ? GlmFamily::binomial_logit
                                 : GlmFamily::gamma_log;
    w.feature_models_.push_back(fit_glm(train, col, dag.parents(col), family));
  }
  w.target_model_ = fit_glm(train, dag.target, dag.parents(dag.target), GlmFamily::binomial_logit);
  return w;
}

}  // namespace privscore
