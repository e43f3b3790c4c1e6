#pragma once

#include <vector>

#include "mem/exploration/knn.hpp"
#include "mem/exploration/point_set.hpp"
#include "mem/exploration/special_functions.hpp"

namespace mem::exploration {

/// Per-point summands of the k-NN particle entropy estimate:
/// log[ n * d_i^q * pi^(q/2) / (k * Gamma(q/2 + 1)) ], with d_i the k-th
/// nearest-neighbour distance. Throws DegenerateSample if any d_i is 0.
std::vector<double> entropy_terms(const PointSet& points, std::size_t k, KnnMethod method = KnnMethod::brute,
                                  const EstimatorConstants& constants = {});

/// Particle entropy estimate in nats: mean(entropy_terms) + log k - digamma(k).
double estimate_entropy(const PointSet& points, std::size_t k, KnnMethod method = KnnMethod::brute,
                        const EstimatorConstants& constants = {});

/// Per-point log d_i.
std::vector<double> simplified_entropy_terms(const PointSet& points, std::size_t k,
                                             KnnMethod method = KnnMethod::brute);

/// (1/n) sum_i log d_i, the constant-free proportional form of the estimate.
double simplified_entropy_score(const PointSet& points, std::size_t k, KnnMethod method = KnnMethod::brute);

}  // namespace mem::exploration
