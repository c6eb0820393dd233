#pragma once

namespace privscore {

// Standard normal CDF.
double normal_cdf(double z);

// Gamma distribution CDF / quantile in shape–scale parameterization.
double gamma_cdf(double x, double shape, double scale);
double gamma_quantile(double p, double shape, double scale);

// Two-sided p-value for a Student-t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace privscore
