#pragma once

#include <span>
#include <string>
#include <vector>

#include "privscore/dataset.hpp"

namespace privscore {

enum class GlmFamily { binomial_logit, gamma_log };

struct FittedGlm {
  GlmFamily family = GlmFamily::binomial_logit;
  std::vector<int> parent_cols;           // design columns; intercept implicit
  std::vector<std::string> parent_names;
  std::vector<double> coef;               // [0] intercept, then one per parent
  double dispersion = 1.0;                // Pearson estimate (gamma family)

  // Row spans are full table rows; the model reads its parent columns.
  double linear_predictor(std::span<const double> row) const;
  double mu(std::span<const double> row) const;  // inverse link of the linear predictor
};

// IRLS fit; converged when the relative deviance change drops below 1e-10 or
// after 100 iterations. The gamma family requires strictly positive
// responses; a rank-deficient design is reported with its column names.
FittedGlm fit_glm(const DatasetTable& table, int response_col,
                  const std::vector<int>& parent_cols, GlmFamily family);

}  // namespace privscore
