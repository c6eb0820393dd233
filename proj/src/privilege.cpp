#include "privscore/privilege.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "privscore/parallel.hpp"
#include "privscore/rng.hpp"
#include "privscore/stats.hpp"

namespace privscore {

WorldModels build_worlds(const DatasetTable& train, const CausalDag& dag, ModelKind kind,
                         const TuningBudget& budget, const WorldOptions& options) {
  WorldModels worlds;
  worlds.warper = fit_warper(train, dag);
  const DatasetTable warped_train = worlds.warper.warp_training_set(train);

  const std::vector<int> model_cols = train.model_feature_columns();
  TuningBudget real_budget = budget;
  real_budget.seed = rng_stream(budget.seed, {rng_tag::fit, 0}).next_u64();
  TuningBudget warped_budget = budget;
  warped_budget.seed = rng_stream(budget.seed, {rng_tag::fit, 1}).next_u64();

  worlds.real_model = fit_classifier(train, dag.target, model_cols, kind, real_budget,
                                     nullptr, options.fixed_real);
  worlds.warped_model = fit_classifier(warped_train, dag.target, model_cols, kind,
                                       warped_budget, nullptr, options.fixed_warped);

  // Training means: both models at the REAL feature values by default; the
  // alternate convention evaluates phi-hat where it was trained.
  double sum_real = 0.0, sum_warped = 0.0;
  std::vector<double> row(train.columns().size());
  for (std::size_t r = 0; r < train.n_rows(); ++r) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = train.at(r, c);
    sum_real += worlds.real_model.predict_proba(row);
    if (options.means_at_warped) {
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = warped_train.at(r, c);
    }
    sum_warped += worlds.warped_model.predict_proba(row);
  }
  worlds.train_mean_real = sum_real / static_cast<double>(train.n_rows());
  worlds.train_mean_warped = sum_warped / static_cast<double>(train.n_rows());
  return worlds;
}

PsEstimate estimate_ps(const WorldModels& worlds, std::span<const double> row) {
  PsEstimate e;
  const std::vector<double> warped = worlds.warper.warp_row(row, Coalition::full(worlds.warper.k()));
  e.pred_real = worlds.real_model.predict_proba(row);
  e.pred_warped = worlds.warped_model.predict_proba(warped);
  e.delta_hat = e.pred_real - e.pred_warped;
  return e;
}

BootstrapInterval interval_from_replicates(std::vector<double> replicates, double alpha) {
  if (replicates.empty()) throw std::invalid_argument("interval_from_replicates: no replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("interval_from_replicates: alpha must be in (0,1)");
  }
  BootstrapInterval interval;
  interval.alpha = alpha;
  interval.lower = quantile_type7(replicates, alpha / 2.0);
  interval.upper = quantile_type7(replicates, 1.0 - alpha / 2.0);
  interval.replicates = std::move(replicates);
  return interval;
}

std::vector<char> bootstrap_pipeline(const DatasetTable& train, const CausalDag& dag,
                                     ModelKind kind, const TuningBudget& budget, int B,
                                     std::uint64_t seed, int workers,
                                     const WorldModels& full_fit, const WorldOptions& options,
                                     const std::function<void(int, const WorldModels&)>& evaluate) {
  const std::size_t n = train.n_rows();

  // Reuse rule: small tuning budgets re-tune inside every replicate; at the
  // full budget the tuned hyperparameters from the full fit are reused.
  const bool reuse = budget.evaluations > 5 && kind == ModelKind::random_forest;
  ForestParams real_params, warped_params;
  WorldOptions replicate_options = options;
  if (reuse) {
    real_params = full_fit.real_model.forest_params().value();
    warped_params = full_fit.warped_model.forest_params().value();
    replicate_options.fixed_real = &real_params;
    replicate_options.fixed_warped = &warped_params;
  }

  std::vector<char> success(B, 0);
  parallel_for(B, workers, [&](int b) {
    for (int attempt = 0; attempt < 3; ++attempt) {
      Rng rng = rng_stream(seed, {rng_tag::bootstrap, static_cast<std::uint64_t>(b),
                                  static_cast<std::uint64_t>(attempt)});
      std::vector<int> draw(n);
      for (std::size_t i = 0; i < n; ++i) draw[i] = static_cast<int>(rng.below(n));
      TuningBudget replicate_budget = budget;
      replicate_budget.seed = rng.next_u64();
      try {
        const DatasetTable resample = train.select_rows(draw);
        const WorldModels worlds =
            build_worlds(resample, dag, kind, replicate_budget, replicate_options);
        evaluate(b, worlds);
        success[b] = 1;
        return;
      } catch (const std::exception& e) {
        if (attempt == 2) {
          std::fprintf(stderr, "warning: bootstrap replicate %d skipped after 3 attempts: %s\n",
                       b, e.what());
        }
      }
    }
  });
  return success;
}

BootstrapInterval bootstrap_ps(const DatasetTable& train, const CausalDag& dag,
                               std::span<const double> row, int B, double alpha,
                               std::uint64_t seed, ModelKind kind, const TuningBudget& budget,
                               int workers) {
  if (B < 20) throw InputError("bootstrap requires B >= 20 replicates");
  const WorldModels full_fit = build_worlds(train, dag, kind, budget);

  std::vector<double> deltas(B, 0.0);
  const std::vector<char> success = bootstrap_pipeline(
      train, dag, kind, budget, B, seed, workers, full_fit, {},
      [&](int b, const WorldModels& worlds) { deltas[b] = estimate_ps(worlds, row).delta_hat; });

  std::vector<double> surviving;
  surviving.reserve(B);
  for (int b = 0; b < B; ++b) {
    if (success[b]) surviving.push_back(deltas[b]);
  }
  return interval_from_replicates(std::move(surviving), alpha);
}

double variance_identity_check(const std::vector<PsEstimate>& replicates) {
  if (replicates.size() < 2) {
    throw std::invalid_argument("variance_identity_check: need at least 2 replicates");
  }
  std::vector<double> ps, pi, phi;
  ps.reserve(replicates.size());
  pi.reserve(replicates.size());
  phi.reserve(replicates.size());
  for (const PsEstimate& e : replicates) {
    ps.push_back(e.delta_hat);
    pi.push_back(e.pred_real);
    phi.push_back(e.pred_warped);
  }
  const double lhs = sample_variance(ps);
  const double rhs =
      sample_variance(pi) + sample_variance(phi) - 2.0 * sample_covariance(pi, phi);
  return std::fabs(lhs - rhs);
}

}  // namespace privscore
