#include "privscore/psc.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "privscore/rng.hpp"
#include "privscore/shapley.hpp"

namespace privscore {

namespace {

double predict_at_coalition(const WorldModels& worlds, const FittedPredictor& model,
                            std::span<const double> row, std::uint64_t mask) {
  const std::vector<double> moved = worlds.warper.warp_row(row, Coalition::from_mask(mask));
  return model.predict_proba(moved);
}

// Collects the per-component replicate values of a decomposition list.
std::vector<double> component_values(const std::vector<PscResult>& replicates,
                                     double PscResult::* field) {
  std::vector<double> out;
  out.reserve(replicates.size());
  for (const PscResult& r : replicates) out.push_back(r.*field);
  return out;
}

}  // namespace

Route route_from_string(const std::string& s) {
  if (s == "real") return Route::real;
  if (s == "warped") return Route::warped;
  throw InputError("unknown route '" + s + "' (expected real or warped)");
}

std::string to_string(Route r) { return r == Route::real ? "real" : "warped"; }

double value_v(const WorldModels& worlds, std::span<const double> row, Coalition s) {
  return worlds.real_model.predict_proba(row) -
         predict_at_coalition(worlds, worlds.real_model, row, s.bits);
}

double value_vtilde(const WorldModels& worlds, std::span<const double> row, Coalition s) {
  return worlds.warped_model.predict_proba(row) -
         predict_at_coalition(worlds, worlds.warped_model, row, s.bits);
}

PscResult psc(const WorldModels& worlds, std::span<const double> row, Route route, int samples,
              std::uint64_t seed) {
  const int k = worlds.warper.k();
  const FittedPredictor& coalition_model =
      route == Route::real ? worlds.real_model : worlds.warped_model;
  const double base = coalition_model.predict_proba(row);

  PscResult result;
  result.route = route;
  if (k <= 8) {
    std::vector<double> values(std::size_t{1} << k);
    values[0] = 0.0;  // warp with S empty copies the row
    for (std::uint64_t mask = 1; mask < values.size(); ++mask) {
      values[mask] = base - predict_at_coalition(worlds, coalition_model, row, mask);
    }
    result.gamma = shapley_subset(values, k);
  } else {
    result.gamma = shapley_sampled(
        [&](std::uint32_t mask) {
          return mask == 0 ? 0.0 : base - predict_at_coalition(worlds, coalition_model, row, mask);
        },
        k, samples, rng_stream(seed, {rng_tag::shapley}));
  }

  const std::vector<double> fully_warped = worlds.warper.warp_row(row, Coalition::full(k));
  const double pi_real = worlds.real_model.predict_proba(row);
  const double phi_warped = worlds.warped_model.predict_proba(fully_warped);
  if (route == Route::real) {
    result.delta0 = worlds.real_model.predict_proba(fully_warped) - phi_warped;
  } else {
    result.delta0 = pi_real - worlds.warped_model.predict_proba(row);
  }
  result.delta_g = worlds.train_mean_real - worlds.train_mean_warped;
  result.delta_xtilde = result.delta0 - result.delta_g;
  result.ps = pi_real - phi_warped;
  return result;
}

PscIntervals psc_intervals_from_replicates(const std::vector<PscResult>& replicates,
                                           double alpha) {
  if (replicates.empty()) {
    throw std::invalid_argument("psc_intervals_from_replicates: no replicates");
  }
  PscIntervals intervals;
  intervals.ps = interval_from_replicates(component_values(replicates, &PscResult::ps), alpha);
  intervals.delta_g =
      interval_from_replicates(component_values(replicates, &PscResult::delta_g), alpha);
  intervals.delta_xtilde =
      interval_from_replicates(component_values(replicates, &PscResult::delta_xtilde), alpha);
  const std::size_t k = replicates.front().gamma.size();
  intervals.gamma.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> values;
    values.reserve(replicates.size());
    for (const PscResult& r : replicates) values.push_back(r.gamma[j]);
    intervals.gamma.push_back(interval_from_replicates(std::move(values), alpha));
  }
  return intervals;
}

PscIntervals bootstrap_psc(const DatasetTable& train, const CausalDag& dag,
                           std::span<const double> row, int B, double alpha, std::uint64_t seed,
                           Route route, ModelKind kind, const TuningBudget& budget, int workers) {
  if (B < 20) throw InputError("bootstrap requires B >= 20 replicates");
  const WorldModels full_fit = build_worlds(train, dag, kind, budget);

  std::vector<PscResult> results(B);
  const std::vector<char> success = bootstrap_pipeline(
      train, dag, kind, budget, B, seed, workers, full_fit, {},
      [&](int b, const WorldModels& worlds) { results[b] = psc(worlds, row, route); });

  std::vector<PscResult> surviving;
  surviving.reserve(B);
  for (int b = 0; b < B; ++b) {
    if (success[b]) surviving.push_back(std::move(results[b]));
  }
  return psc_intervals_from_replicates(surviving, alpha);
}

StandardShapleyResult standard_shapley(const WorldModels& worlds, std::span<const double> row,
                                       const DatasetTable& background, int samples,
                                       std::uint64_t seed) {
  if (background.n_rows() == 0) {
    throw std::invalid_argument("standard_shapley: empty background");
  }
  const std::vector<int>& features = worlds.real_model.feature_columns();
  const int p = static_cast<int>(features.size());
  const Coalition all_arrows = Coalition::full(worlds.warper.k());

  // Cap the background at 500 rows (seeded uniform subsample), then fix both
  // sides: real rows for pi-hat, their fully warped twins for phi-hat.
  std::vector<int> keep(background.n_rows());
  std::iota(keep.begin(), keep.end(), 0);
  if (keep.size() > 500) {
    rng_stream(seed, {rng_tag::background}).shuffle(keep);
    keep.resize(500);
    std::sort(keep.begin(), keep.end());
  }
  std::vector<std::vector<double>> bg_real, bg_warped;
  bg_real.reserve(keep.size());
  bg_warped.reserve(keep.size());
  for (int r : keep) {
    bg_real.push_back(background.row(r));
    bg_warped.push_back(worlds.warper.warp_row(bg_real.back(), all_arrows));
  }
  const std::vector<double> x_real(row.begin(), row.end());
  const std::vector<double> x_warped = worlds.warper.warp_row(row, all_arrows);

  // Marginal expectation of a model over the background, with the features in
  // `mask` pinned to the explained row's values.
  auto masked_mean = [&](const FittedPredictor& model, const std::vector<double>& x,
                         const std::vector<std::vector<double>>& bg, std::uint32_t mask) {
    double sum = 0.0;
    std::vector<double> composite;
    for (const std::vector<double>& z : bg) {
      composite = z;
      for (int j = 0; j < p; ++j) {
        if ((mask >> j) & 1) composite[features[j]] = x[features[j]];
      }
      sum += model.predict_proba(composite);
    }
    return sum / static_cast<double>(bg.size());
  };

  StandardShapleyResult result;
  std::vector<double> beta_real, beta_warped;
  if (p <= 8) {
    std::vector<double> val_real(std::size_t{1} << p), val_warped(std::size_t{1} << p);
    for (std::uint32_t mask = 0; mask < val_real.size(); ++mask) {
      val_real[mask] = masked_mean(worlds.real_model, x_real, bg_real, mask);
      val_warped[mask] = masked_mean(worlds.warped_model, x_warped, bg_warped, mask);
    }
    beta_real = shapley_subset(val_real, p);
    beta_warped = shapley_subset(val_warped, p);
    result.eta0 = val_real[0] - val_warped[0];
  } else {
    // Permutation sampling: one background row and one feature order per
    // draw, shared by both models so the difference is paired.
    beta_real.assign(p, 0.0);
    beta_warped.assign(p, 0.0);
    Rng rng = rng_stream(seed, {rng_tag::shapley});
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> comp_real, comp_warped;
    for (int s = 0; s < samples; ++s) {
      const std::size_t z = rng.below(bg_real.size());
      rng.shuffle(order);
      comp_real = bg_real[z];
      comp_warped = bg_warped[z];
      double prev_real = worlds.real_model.predict_proba(comp_real);
      double prev_warped = worlds.warped_model.predict_proba(comp_warped);
      for (int j : order) {
        comp_real[features[j]] = x_real[features[j]];
        comp_warped[features[j]] = x_warped[features[j]];
        const double cur_real = worlds.real_model.predict_proba(comp_real);
        const double cur_warped = worlds.warped_model.predict_proba(comp_warped);
        beta_real[j] += cur_real - prev_real;
        beta_warped[j] += cur_warped - prev_warped;
        prev_real = cur_real;
        prev_warped = cur_warped;
      }
    }
    for (int j = 0; j < p; ++j) {
      beta_real[j] /= samples;
      beta_warped[j] /= samples;
    }
    result.eta0 = masked_mean(worlds.real_model, x_real, bg_real, 0) -
                  masked_mean(worlds.warped_model, x_warped, bg_warped, 0);
  }

  result.eta.resize(p);
  for (int j = 0; j < p; ++j) result.eta[j] = beta_real[j] - beta_warped[j];
  return result;
}

}  // namespace privscore
