#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "privscore/psc.hpp"

namespace privscore {

// Permutation feature importance of one feature on the privilege score:
// permute the column across test rows, recompute PS with the same warper and
// models, and average the MSE against the unpermuted reference over
// `repeats` permutations. Non-negative; exactly 0 when permutation cannot
// change predictions.
double pfi(const WorldModels& worlds, const DatasetTable& test,
           const std::vector<double>& reference_ps, int feature_col, int repeats,
           std::uint64_t seed);

struct PscImportance {
  double ps = 0.0;
  double delta_g = 0.0;
  double delta_xtilde = 0.0;
  std::vector<double> gamma;
};

// Mean absolute value per decomposition component, intercepts included.
PscImportance psc_importance(const std::vector<PscResult>& results);

struct ComponentSummary {
  std::string name;  // "ps", "delta_g", "delta_x", "gamma_1", ...
  double mean = 0.0;
  double lower = 0.0;  // alpha and 1-alpha empirical quantiles
  double upper = 0.0;
  double importance = 0.0;
};

struct SubgroupSummary {
  std::size_t n = 0;
  double alpha = 0.05;
  std::vector<ComponentSummary> components;
};

// Mean, (alpha, 1-alpha) quantiles, and importance of every component over
// the selected subset of results.
SubgroupSummary subgroup_summary(const std::vector<PscResult>& results,
                                 const std::vector<int>& group_rows, double alpha);

struct CoefficientRow {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_value = 0.0;
  double p_value = 0.0;
};

struct RegressionSummary {
  std::vector<CoefficientRow> coefficients;  // intercept first
  std::size_t n = 0;
  std::size_t p_params = 0;
  double residual_variance = 0.0;
  bool zero_residual_variance = false;

  // Four-decimal text table (Estimate, Std. Error, t value, Pr(>|t|)).
  std::string format_table() const;
};

// OLS of the per-row privilege scores on the given regressors plus an
// intercept, with classical standard errors and Student-t p-values.
RegressionSummary regress_ps(const DatasetTable& test, const std::vector<double>& ps,
                             const std::vector<int>& regressor_cols);

}  // namespace privscore
