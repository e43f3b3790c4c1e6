#pragma once

#include <cstdint>
#include <vector>

#include "mem/exploration/knn.hpp"
#include "mem/exploration/point_set.hpp"

namespace mem::exploration {

/// Multi-view intrinsic reward for every step of a pool of T steps:
///   r_t = 1/(N+1) * [ sum_i log(|y^i_t - knn(y^i_t)| + 1) + log(|xbar_t - knn(xbar_t)| + 1) ]
/// where each k-NN is taken within its own stream over the same pool.
/// `specific` holds N streams of T points; `shared_mean` holds T points.
std::vector<double> multiview_intrinsic_rewards(const std::vector<PointSet>& specific, const PointSet& shared_mean,
                                                std::size_t k);

enum class Re3Form { raw_distance, log1p_distance };
enum class Re3Aggregate { kth, mean_of_k };

/// Single-view baseline rewards over one feature stream.
std::vector<double> re3_rewards(const PointSet& features, std::size_t k, Re3Form form, Re3Aggregate aggregate);

/// beta_t = beta0 * (1 - kappa)^t.
struct BetaSchedule {
  double beta0 = 0.05;
  double kappa = 1e-5;

  void validate() const;
};

double beta_at(const BetaSchedule& schedule, std::int64_t t);

/// extrinsic + beta * intrinsic.
double total_reward(double extrinsic, double intrinsic, double beta);

}  // namespace mem::exploration
