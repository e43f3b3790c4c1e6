#pragma once

#include <numbers>

namespace mem::exploration {

/// Gamma function (stdlib).
double gamma_fn(double x);
/// log|Gamma(x)| (stdlib).
double log_gamma_fn(double x);
/// Digamma for x > 0: upward recurrence to x >= 10, then the asymptotic series.
double digamma_fn(double x);

/// The special functions and constant the particle entropy estimator uses.
struct EstimatorConstants {
  double (*gamma)(double) = &gamma_fn;
  double (*log_gamma)(double) = &log_gamma_fn;
  double (*digamma)(double) = &digamma_fn;
  double pi_hat = std::numbers::pi;
};

}  // namespace mem::exploration
