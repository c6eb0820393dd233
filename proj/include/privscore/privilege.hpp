#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "privscore/dag.hpp"
#include "privscore/dataset.hpp"
#include "privscore/models.hpp"
#include "privscore/warp.hpp"

namespace privscore {

// The fitted pair of worlds: pi-hat on real training data, phi-hat on the
// warped copy, plus the training means both models take at the REAL feature
// values (the intercept split's global reference points).
struct WorldModels {
  FittedPredictor real_model;
  FittedPredictor warped_model;
  Warper warper;
  double train_mean_real = 0.0;
  double train_mean_warped = 0.0;
};

struct WorldOptions {
  // Evaluate phi-hat's training mean at warped feature values instead of the
  // default real values (alternate convention, off by default).
  bool means_at_warped = false;
  // Pin forest hyperparameters instead of tuning (bootstrap replicates reuse
  // the full fit's tuned parameters this way).
  const ForestParams* fixed_real = nullptr;
  const ForestParams* fixed_warped = nullptr;
};

WorldModels build_worlds(const DatasetTable& train, const CausalDag& dag, ModelKind kind,
                         const TuningBudget& budget, const WorldOptions& options = {});

struct PsEstimate {
  double delta_hat = 0.0;  // pred_real - pred_warped
  double pred_real = 0.0;
  double pred_warped = 0.0;
};

// delta-hat = pi-hat(x) - phi-hat(x-tilde) with the fully warped row.
PsEstimate estimate_ps(const WorldModels& worlds, std::span<const double> row);

struct BootstrapInterval {
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.1;
  std::vector<double> replicates;
};

// Percentile interval at the alpha/2 and 1-alpha/2 type-7 quantiles.
BootstrapInterval interval_from_replicates(std::vector<double> replicates, double alpha);

// Runs B bootstrap replicates of the full pipeline (resample train with
// replacement, refit warper and both models) and calls evaluate(b, worlds)
// for each replicate that fit successfully. A failed replicate is retried on
// up to 3 fresh resamples, then skipped with a warning. Forest
// hyperparameters are re-tuned per replicate only when budget.evaluations is
// 5 or fewer; otherwise the tuned parameters of `full_fit` are reused.
// Replicates fan out over `workers` threads; their streams are keyed by
// replicate index, so results do not depend on scheduling. Returns one
// success flag per replicate.
std::vector<char> bootstrap_pipeline(const DatasetTable& train, const CausalDag& dag,
                                     ModelKind kind, const TuningBudget& budget, int B,
                                     std::uint64_t seed, int workers,
                                     const WorldModels& full_fit, const WorldOptions& options,
                                     const std::function<void(int, const WorldModels&)>& evaluate);

// Full-pipeline percentile bootstrap for one row's privilege score. B >= 20.
BootstrapInterval bootstrap_ps(const DatasetTable& train, const CausalDag& dag,
                               std::span<const double> row, int B, double alpha,
                               std::uint64_t seed, ModelKind kind = ModelKind::random_forest,
                               const TuningBudget& budget = {}, int workers = 1);

// |var(delta) - (var(pi) + var(phi) - 2 cov(pi, phi))| over replicate
// predictions, all moments with the n-1 denominator. Algebraically zero; the
// residual is floating-point noise only.
double variance_identity_check(const std::vector<PsEstimate>& replicates);

}  // namespace privscore
