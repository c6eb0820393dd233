#include "privscore/scm.hpp"

#include <cmath>
#include <stdexcept>

#include "privscore/rng.hpp"
#include "privscore/shapley.hpp"
#include "privscore/special.hpp"

namespace privscore {

Scenario scenario_from_string(const std::string& s) {
  if (s == "sc") return Scenario::sc;
  if (s == "sm") return Scenario::sm;
  if (s == "null") return Scenario::null_effect;
  throw InputError("unknown scenario '" + s + "' (expected sc|sm|null)");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::sc: return "sc";
    case Scenario::sm: return "sm";
    case Scenario::null_effect: return "null";
  }
  return "?";
}

namespace {

// Structural parameters shared by the scenarios; the null variant zeroes all
// coefficients on A.
struct ScmParams {
  double a_on_c = 0.0;  // only nonzero in sm
  double a_on_x1 = 0.175;
  double a_on_x2 = -1.25;
  double a_on_y = 1.75;
};

ScmParams params_for(Scenario s) {
  ScmParams p;
  if (s == Scenario::sm) p.a_on_c = 0.8;
  if (s == Scenario::null_effect) {
    p.a_on_x1 = 0.0;
    p.a_on_x2 = 0.0;
    p.a_on_y = 0.0;
  }
  return p;
}

double draw_c(Scenario s, const ScmParams& p, double a, double u) {
  if (s == Scenario::sm) {
    return gamma_quantile(u, 10.0, 2.0 * std::exp(0.1 + p.a_on_c * a));
  }
  return gamma_quantile(u, 9.76, 3.64);
}

double draw_x1(const ScmParams& p, double a, double c, double u) {
  const double scale = 0.74 * std::exp(7.9 + p.a_on_x1 * a + 0.005 * c);
  return gamma_quantile(u, 1.0 / 0.74, scale);
}

double x2_prob(const ScmParams& p, double a, double c) {
  return normal_cdf(4.0 + p.a_on_x2 * a - 0.1 * c);
}

double y_prob(const ScmParams& p, double a, double c, double x1, double x2) {
  return normal_cdf(0.9 + 0.1 * c + p.a_on_y * a - 0.7 * x2 - 0.001 * x1);
}

}  // namespace

std::vector<ColumnSpec> scenario_columns() {
  return {
      {"A", ColumnKind::binary, ColumnRole::pa},
      {"C", ColumnKind::numeric, ColumnRole::confounder},
      {"X1", ColumnKind::numeric, ColumnRole::feature},
      {"X2", ColumnKind::binary, ColumnRole::feature},
      {"Y", ColumnKind::binary, ColumnRole::target},
  };
}

CausalDag scenario_dag() {
  CausalDag dag;
  dag.nodes = {"A", "C", "X1", "X2", "Y"};
  auto e = [&](const char* p, const char* c) {
    dag.edges.emplace_back(dag.node_index(p), dag.node_index(c));
  };
  e("C", "X1");
  e("C", "X2");
  e("X1", "Y");
  e("X2", "Y");
  e("A", "X1");
  e("A", "X2");
  e("A", "Y");
  dag.pa = dag.node_index("A");
  dag.target = dag.node_index("Y");
  dag.advantaged_level = 1.0;
  return dag;
}

PairedSample sample_paired(const ScmSpec& spec) {
  if (spec.n < 1) throw InputError("sample size must be at least 1");
  const ScmParams p = params_for(spec.scenario);

  PairedSample out;
  out.real_rows = DatasetTable(scenario_columns(), spec.n);
  out.find_rows = DatasetTable(scenario_columns(), spec.n);
  out.true_pi.resize(spec.n);
  out.true_psi.resize(spec.n);
  out.true_delta.resize(spec.n);

  for (std::size_t i = 0; i < spec.n; ++i) {
    Rng rng = rng_stream(spec.seed, {rng_tag::sample, rng_tag::individual, i});
    const double u_a = rng.uniform();
    const double u_c = rng.uniform();
    const double u_x1 = rng.uniform();
    const double u_x2 = rng.uniform();
    const double u_y = rng.uniform();

    const double a = u_a < 0.69 ? 1.0 : 0.0;
    const double c = draw_c(spec.scenario, p, a, u_c);
    const double x1 = draw_x1(p, a, c, u_x1);
    const double x2 = u_x2 < x2_prob(p, a, c) ? 1.0 : 0.0;
    const double pi = y_prob(p, a, c, x1, x2);
    const double y = u_y < pi ? 1.0 : 0.0;

    const double c_f = draw_c(spec.scenario, p, 1.0, u_c);
    const double x1_f = draw_x1(p, 1.0, c_f, u_x1);
    const double x2_f = u_x2 < x2_prob(p, 1.0, c_f) ? 1.0 : 0.0;
    const double psi = y_prob(p, 1.0, c_f, x1_f, x2_f);
    const double y_f = u_y < psi ? 1.0 : 0.0;

    out.real_rows.set_row(i, std::vector<double>{a, c, x1, x2, y});
    out.find_rows.set_row(i, std::vector<double>{1.0, c_f, x1_f, x2_f, y_f});
    out.true_pi[i] = pi;
    out.true_psi[i] = psi;
    out.true_delta[i] = pi - psi;
  }
  return out;
}

double true_ps(Scenario scenario, std::span<const double> real_row,
               std::span<const double> find_row) {
  const ScmParams p = params_for(scenario);
  const double pi = y_prob(p, real_row[0], real_row[1], real_row[2], real_row[3]);
  const double psi = y_prob(p, 1.0, find_row[1], find_row[2], find_row[3]);
  return pi - psi;
}

TrueWorldMeans true_world_means(Scenario scenario, std::size_t n, std::uint64_t seed) {
  const ScmParams p = params_for(scenario);
  double sum_real = 0.0;
  double sum_fair = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = rng_stream(seed, {rng_tag::sample, rng_tag::individual, i});
    const double u_a = rng.uniform();
    const double u_c = rng.uniform();
    const double u_x1 = rng.uniform();
    const double u_x2 = rng.uniform();

    const double a = u_a < 0.69 ? 1.0 : 0.0;
    const double c = draw_c(scenario, p, a, u_c);
    const double x1 = draw_x1(p, a, c, u_x1);
    const double x2 = u_x2 < x2_prob(p, a, c) ? 1.0 : 0.0;

    sum_real += y_prob(p, a, c, x1, x2);
    // Fair-world response function evaluated at the REAL feature values.
    sum_fair += y_prob(p, 1.0, c, x1, x2);
  }
  TrueWorldMeans m;
  m.mean_real = sum_real / static_cast<double>(n);
  m.mean_fair_at_real = sum_fair / static_cast<double>(n);
  return m;
}

TrueComponents true_psc_components(Scenario scenario, const PairedSample& sample,
                                   std::size_t row, const TrueWorldMeans& means) {
  const ScmParams p = params_for(scenario);
  const double a = sample.real_rows.at(row, 0);
  const double c = sample.real_rows.at(row, 1);
  const double x1 = sample.real_rows.at(row, 2);
  const double x2 = sample.real_rows.at(row, 3);
  const double x1_f = sample.find_rows.at(row, 2);
  const double x2_f = sample.find_rows.at(row, 3);

  // Value table over the two privilege arrows; substituting the coupled
  // twin's value for an arrow's child feature is the true warp. The
  // confounder stays real.
  auto pi_at = [&](double v1, double v2) { return y_prob(p, a, c, v1, v2); };
  const double pi_x = pi_at(x1, x2);
  std::vector<double> values(4);
  values[0b00] = 0.0;
  values[0b01] = pi_x - pi_at(x1_f, x2);
  values[0b10] = pi_x - pi_at(x1, x2_f);
  values[0b11] = pi_x - pi_at(x1_f, x2_f);

  TrueComponents out;
  out.gamma = shapley_subset(values, 2);
  const double fair_at_xtilde = y_prob(p, 1.0, c, x1_f, x2_f);
  out.delta0 = pi_at(x1_f, x2_f) - fair_at_xtilde;
  out.delta_g = means.mean_real - means.mean_fair_at_real;
  out.delta_xtilde = out.delta0 - out.delta_g;
  out.delta = sample.true_delta[row];
  return out;
}

}  // namespace privscore
