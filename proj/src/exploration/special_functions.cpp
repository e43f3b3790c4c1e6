#include "mem/exploration/special_functions.hpp"

#include <cmath>
#include <limits>

namespace mem::exploration {

double gamma_fn(double x) { return std::tgamma(x); }

double log_gamma_fn(double x) { return std::lgamma(x); }

double digamma_fn(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli terms B_2n / (2n x^2n) for n = 1..6.
  const double series =
      inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760))))));
  return result + std::log(x) - 0.5 * inv - series;
}

}  // namespace mem::exploration
