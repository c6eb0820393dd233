#include "privscore/analytics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "privscore/format.hpp"
#include "privscore/rng.hpp"
#include "privscore/special.hpp"
#include "privscore/stats.hpp"

namespace privscore {

double pfi(const WorldModels& worlds, const DatasetTable& test,
           const std::vector<double>& reference_ps, int feature_col, int repeats,
           std::uint64_t seed) {
  const std::size_t n = test.n_rows();
  if (reference_ps.size() != n) throw std::invalid_argument("pfi: reference length mismatch");
  if (repeats < 1) throw std::invalid_argument("pfi: repeats must be >= 1");

  double total = 0.0;
  std::vector<int> perm(n);
  std::vector<double> row(test.columns().size());
  for (int rep = 0; rep < repeats; ++rep) {
    std::iota(perm.begin(), perm.end(), 0);
    rng_stream(seed, {rng_tag::pfi, static_cast<std::uint64_t>(rep)}).shuffle(perm);
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = test.at(i, c);
      row[feature_col] = test.at(perm[i], feature_col);
      const double diff = estimate_ps(worlds, row).delta_hat - reference_ps[i];
      mse += diff * diff;
    }
    total += mse / static_cast<double>(n);
  }
  return total / repeats;
}

PscImportance psc_importance(const std::vector<PscResult>& results) {
  if (results.empty()) throw std::invalid_argument("psc_importance: empty results");
  PscImportance imp;
  imp.gamma.assign(results.front().gamma.size(), 0.0);
  for (const PscResult& r : results) {
    imp.ps += std::fabs(r.ps);
    imp.delta_g += std::fabs(r.delta_g);
    imp.delta_xtilde += std::fabs(r.delta_xtilde);
    for (std::size_t j = 0; j < imp.gamma.size(); ++j) imp.gamma[j] += std::fabs(r.gamma[j]);
  }
  const double n = static_cast<double>(results.size());
  imp.ps /= n;
  imp.delta_g /= n;
  imp.delta_xtilde /= n;
  for (double& g : imp.gamma) g /= n;
  return imp;
}

SubgroupSummary subgroup_summary(const std::vector<PscResult>& results,
                                 const std::vector<int>& group_rows, double alpha) {
  if (group_rows.empty()) throw std::invalid_argument("subgroup_summary: empty group");

  std::vector<PscResult> group;
  group.reserve(group_rows.size());
  for (int r : group_rows) group.push_back(results.at(r));

  const std::size_t k = group.front().gamma.size();
  SubgroupSummary summary;
  summary.n = group.size();
  summary.alpha = alpha;

  auto add = [&](const std::string& name, auto getter) {
    std::vector<double> values;
    values.reserve(group.size());
    for (const PscResult& r : group) values.push_back(getter(r));
    ComponentSummary c;
    c.name = name;
    c.mean = mean(values);
    c.lower = quantile_type7(values, alpha);
    c.upper = quantile_type7(values, 1.0 - alpha);
    c.importance = mean_abs(values);
    summary.components.push_back(std::move(c));
  };

  add("ps", [](const PscResult& r) { return r.ps; });
  add("delta_g", [](const PscResult& r) { return r.delta_g; });
  add("delta_x", [](const PscResult& r) { return r.delta_xtilde; });
  for (std::size_t j = 0; j < k; ++j) {
    add("gamma_" + std::to_string(j + 1), [j](const PscResult& r) { return r.gamma[j]; });
  }
  return summary;
}

std::string RegressionSummary::format_table() const {
  std::string out = "                Estimate  Std. Error  t value  Pr(>|t|)\n";
  for (const CoefficientRow& row : coefficients) {
    std::string name = row.name;
    if (name.size() < 14) name.resize(14, ' ');
    out += name + "  " + format_f4(row.estimate) + "      " + format_f4(row.std_error) + "   " +
           format_f4(row.t_value) + "    " + format_f4(row.p_value) + "\n";
  }
  out += "n = " + std::to_string(n) + ", residual variance = " + format_f4(residual_variance);
  if (zero_residual_variance) out += " (zero residual variance; t and p degenerate)";
  out += "\n";
  return out;
}

RegressionSummary regress_ps(const DatasetTable& test, const std::vector<double>& ps,
                             const std::vector<int>& regressor_cols) {
  const std::size_t n = test.n_rows();
  const std::size_t p = regressor_cols.size() + 1;
  if (ps.size() != n) throw std::invalid_argument("regress_ps: ps length mismatch");
  if (n <= p) throw std::invalid_argument("regress_ps: need more rows than parameters");

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 0; j < regressor_cols.size(); ++j) {
      x(i, j + 1) = test.at(i, regressor_cols[j]);
    }
    y(i) = ps[i];
  }

  // Rank check column by column so the error can name the offender.
  for (std::size_t j = 0; j < p; ++j) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.leftCols(j + 1));
    qr.setThreshold(1e-10);
    if (static_cast<std::size_t>(qr.rank()) != j + 1) {
      const std::string name =
          j == 0 ? "(intercept)" : test.columns()[regressor_cols[j - 1]].name;
      throw InputError("regress_ps: design is rank-deficient at column '" + name + "'");
    }
  }

  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd beta = xtx.ldlt().solve(x.transpose() * y);
  const Eigen::VectorXd residuals = y - x * beta;
  const double rss = residuals.squaredNorm();
  const double df = static_cast<double>(n - p);
  const double s2 = rss / df;
  const Eigen::MatrixXd xtx_inv = xtx.inverse();

  RegressionSummary summary;
  summary.n = n;
  summary.p_params = p;
  summary.residual_variance = s2;
  summary.zero_residual_variance = s2 < 1e-300;
  for (std::size_t j = 0; j < p; ++j) {
    CoefficientRow row;
    row.name = j == 0 ? "(intercept)" : test.columns()[regressor_cols[j - 1]].name;
    row.estimate = beta(j);
    row.std_error = std::sqrt(s2 * xtx_inv(j, j));
    if (summary.zero_residual_variance) {
      row.t_value = row.estimate == 0.0 ? 0.0
                                        : std::copysign(std::numeric_limits<double>::infinity(),
                                                        row.estimate);
      row.p_value = row.estimate == 0.0 ? 1.0 : 0.0;
    } else {
      row.t_value = row.estimate / row.std_error;
      row.p_value = student_t_two_sided_p(row.t_value, df);
    }
    summary.coefficients.push_back(std::move(row));
  }
  return summary;
}

}  // namespace privscore
