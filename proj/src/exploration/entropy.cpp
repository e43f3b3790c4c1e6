#include "mem/exploration/entropy.hpp"

#include <cmath>

#include "mem/errors.hpp"

namespace mem::exploration {

namespace {

std::vector<double> log_knn_distances(const PointSet& points, std::size_t k, KnnMethod method) {
  std::vector<double> d = knn_distances_batch(points, k, method);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) {
      throw DegenerateSample("point " + std::to_string(i) + " has a zero k-NN distance; dedupe or jitter the sample");
    }
    d[i] = std::log(d[i]);
  }
  return d;
}

}  // namespace

std::vector<double> entropy_terms(const PointSet& points, std::size_t k, KnnMethod method,
                                  const EstimatorConstants& constants) {
  const double n = static_cast<double>(points.size());
  const double q = static_cast<double>(points.dim());
  const double offset = std::log(n) + 0.5 * q * std::log(constants.pi_hat) - std::log(static_cast<double>(k)) -
                        constants.log_gamma(0.5 * q + 1.0);
  std::vector<double> terms = log_knn_distances(points, k, method);
  for (double& t : terms) t = offset + q * t;
  return terms;
}

double estimate_entropy(const PointSet& points, std::size_t k, KnnMethod method,
                        const EstimatorConstants& constants) {
  const std::vector<double> terms = entropy_terms(points, k, method, constants);
  double s = 0.0;
  for (double t : terms) s += t;
  const double kd = static_cast<double>(k);
  return s / static_cast<double>(terms.size()) + std::log(kd) - constants.digamma(kd);
}

std::vector<double> simplified_entropy_terms(const PointSet& points, std::size_t k, KnnMethod method) {
  return log_knn_distances(points, k, method);
}

double simplified_entropy_score(const PointSet& points, std::size_t k, KnnMethod method) {
  const std::vector<double> terms = simplified_entropy_terms(points, k, method);
  double s = 0.0;
  for (double t : terms) s += t;
  return s / static_cast<double>(terms.size());
}

}  // namespace mem::exploration
