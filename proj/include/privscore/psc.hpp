#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "privscore/privilege.hpp"

namespace privscore {

// Which world anchors the path attribution: `real` plays coalitions through
// pi-hat and books the level shift at the warped row; `warped` plays them
// through phi-hat and books the shift at the real row. Both routes sum to the
// same privilege score.
enum class Route { real, warped };

Route route_from_string(const std::string& s);
std::string to_string(Route r);

// v(S) = pi-hat(x) - pi-hat(x_S): the prediction change from removing the
// privilege arrows in S.
double value_v(const WorldModels& worlds, std::span<const double> row, Coalition s);

// Same with the warped-world model: phi-hat(x) - phi-hat(x_S).
double value_vtilde(const WorldModels& worlds, std::span<const double> row, Coalition s);

struct PscResult {
  std::vector<double> gamma;   // one Shapley share per privilege arrow
  double delta_g = 0.0;        // global intercept: train mean gap
  double delta_xtilde = 0.0;   // individual intercept around the global one
  double delta0 = 0.0;         // local intercept; equals delta_g + delta_xtilde
  double ps = 0.0;             // delta0 + sum(gamma)
  Route route = Route::real;
};

// Shapley decomposition of the privilege score over the privilege arrows.
// Exact subset enumeration for k <= 8; beyond that, permutation sampling with
// `samples` draws seeded from `seed`.
PscResult psc(const WorldModels& worlds, std::span<const double> row, Route route,
              int samples = 256, std::uint64_t seed = 0);

struct PscIntervals {
  BootstrapInterval ps;
  BootstrapInterval delta_g;
  BootstrapInterval delta_xtilde;
  std::vector<BootstrapInterval> gamma;
};

// Builds per-component intervals from replicate decompositions (percentile,
// matching interval_from_replicates).
PscIntervals psc_intervals_from_replicates(const std::vector<PscResult>& replicates,
                                           double alpha);

// Full-pipeline bootstrap of the decomposition for one row; training means
// are recomputed per replicate. B >= 20.
PscIntervals bootstrap_psc(const DatasetTable& train, const CausalDag& dag,
                           std::span<const double> row, int B, double alpha,
                           std::uint64_t seed, Route route = Route::real,
                           ModelKind kind = ModelKind::random_forest,
                           const TuningBudget& budget = {}, int workers = 1);

struct StandardShapleyResult {
  double eta0 = 0.0;           // difference of background mean predictions
  std::vector<double> eta;     // per model feature: beta_j - beta-tilde_j
};

// Feature-level Shapley attribution of the privilege score itself: beta_j
// explains pi-hat at the real row against the background sample, beta-tilde_j
// explains phi-hat at the warped row against the warped background. Exact
// subset enumeration when the model has at most 8 features, else permutation
// sampling with `samples` draws. Backgrounds larger than 500 rows are
// subsampled with a seeded stream.
StandardShapleyResult standard_shapley(const WorldModels& worlds, std::span<const double> row,
                                       const DatasetTable& background, int samples,
                                       std::uint64_t seed);

}  // namespace privscore
