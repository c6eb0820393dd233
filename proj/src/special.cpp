#include "privscore/special.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace privscore {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double gamma_cdf(double x, double shape, double scale) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, x / scale);
}

double gamma_quantile(double p, double shape, double scale) {
  // Uniform draws live in [0,1); keep the inverse CDF inside the open support.
  if (p < 1e-300) p = 1e-300;
  if (p > 1.0 - 1e-16) p = 1.0 - 1e-16;
  return boost::math::gamma_p_inv(shape, p) * scale;
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::nan("");
  if (std::isinf(t)) return 0.0;
  boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(dist, -std::fabs(t));
}

}  // namespace privscore
