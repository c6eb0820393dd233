#pragma once

#include <cstdint>
#include <vector>

#include "privscore/dag.hpp"
#include "privscore/dataset.hpp"

namespace privscore {

// Simulation scenarios. `sc` has an exogenous confounder; `sm` makes the
// confounder a PA-descendant while the analysis DAG stays the same (the
// misspecified case); `null_effect` zeroes every PA coefficient so the true
// privilege score is exactly 0 for everyone.
enum class Scenario { sc, sm, null_effect };

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

struct ScmSpec {
  Scenario scenario = Scenario::sc;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
};

// Coupled draw: real world and its fair-world twin share the same exogenous
// uniforms; the twin sets A to the advantaged level and recomputes all
// descendants through inverse-CDF transforms, so the coupling is exact.
struct PairedSample {
  DatasetTable real_rows;  // columns A, C, X1, X2, Y
  DatasetTable find_rows;  // same schema, A forced to 1
  std::vector<double> true_pi;
  std::vector<double> true_psi;
  std::vector<double> true_delta;
};

PairedSample sample_paired(const ScmSpec& spec);

// True individual privilege score from the generating probability function.
double true_ps(Scenario scenario, std::span<const double> real_row,
               std::span<const double> find_row);

// The analysis DAG and column schema shared by both scenarios.
CausalDag scenario_dag();
std::vector<ColumnSpec> scenario_columns();

// Population means of the true real-world probability and of the true
// fair-world probability evaluated at real feature values; Monte Carlo with
// its own stream, cached per (scenario, n, seed).
struct TrueWorldMeans {
  double mean_real = 0.0;
  double mean_fair_at_real = 0.0;
};
TrueWorldMeans true_world_means(Scenario scenario, std::size_t n, std::uint64_t seed);

// Ground-truth decomposition for one sampled individual: Shapley shares of
// the two privilege arrows plus intercepts, computed from the generating
// probability function with the coupled twin's feature values playing the
// role of the warp. The confounder keeps its real value (the analysis DAG
// never warps it), which in `sm` is exactly the documented misspecification.
struct TrueComponents {
  double delta = 0.0;
  double delta0 = 0.0;
  double delta_g = 0.0;
  double delta_xtilde = 0.0;
  std::vector<double> gamma;
};
TrueComponents true_psc_components(Scenario scenario, const PairedSample& sample,
                                   std::size_t row, const TrueWorldMeans& means);

}  // namespace privscore
