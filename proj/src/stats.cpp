#include "privscore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace privscore {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double sample_covariance(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("sample_covariance: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("sample_covariance: need at least 2 values");
  const double mx = mean(xs);
  const double my = mean(ys);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (xs[i] - mx) * (ys[i] - my);
  return s / static_cast<double>(xs.size() - 1);
}

double mean_abs(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_abs: empty input");
  double s = 0.0;
  for (double x : xs) s += std::fabs(x);
  return s / static_cast<double>(xs.size());
}

double quantile_type7(std::vector<double> xs, double p) {
  if (xs.empty()) throw std::invalid_argument("quantile_type7: empty input");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile_type7: p outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

}  // namespace privscore
