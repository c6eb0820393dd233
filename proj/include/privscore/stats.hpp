#pragma once

#include <cstddef>
#include <vector>

namespace privscore {

double mean(const std::vector<double>& xs);

// Sample variance / covariance with the n-1 denominator.
double sample_variance(const std::vector<double>& xs);
double sample_covariance(const std::vector<double>& xs, const std::vector<double>& ys);

double mean_abs(const std::vector<double>& xs);

// Empirical quantile, type-7 convention (linear interpolation between order
// statistics at h = (n-1)p). `xs` need not be sorted.
double quantile_type7(std::vector<double> xs, double p);

}  // namespace privscore
