#include "mem/exploration/intrinsic.hpp"

#include <cmath>
#include <string>

#include "mem/errors.hpp"

namespace mem::exploration {

std::vector<double> multiview_intrinsic_rewards(const std::vector<PointSet>& specific, const PointSet& shared_mean,
                                                std::size_t k) {
  const std::size_t steps = shared_mean.size();
  for (std::size_t i = 0; i < specific.size(); ++i) {
    if (specific[i].size() != steps) {
      throw StreamLengthMismatch("specific stream " + std::to_string(i) + " has " +
                                 std::to_string(specific[i].size()) + " steps, shared mean has " +
                                 std::to_string(steps));
    }
  }
  const KnnMethod method = default_method(steps);
  std::vector<double> reward(steps, 0.0);
  auto accumulate = [&](const PointSet& stream) {
    const std::vector<double> d = knn_distances_batch(stream, k, method);
    for (std::size_t t = 0; t < steps; ++t) reward[t] += std::log(d[t] + 1.0);
  };
  for (const PointSet& stream : specific) accumulate(stream);
  accumulate(shared_mean);
  const double inv = 1.0 / static_cast<double>(specific.size() + 1);
  for (double& r : reward) r *= inv;
  return reward;
}

std::vector<double> re3_rewards(const PointSet& features, std::size_t k, Re3Form form, Re3Aggregate aggregate) {
  const KnnMethod method = default_method(features.size());
  std::vector<double> d = aggregate == Re3Aggregate::kth ? knn_distances_batch(features, k, method)
                                                         : knn_mean_distances_batch(features, k, method);
  if (form == Re3Form::log1p_distance) {
    for (double& x : d) x = std::log(x + 1.0);
  }
  return d;
}

void BetaSchedule::validate() const {
  if (!(beta0 >= 0.0) || !std::isfinite(beta0)) throw ConfigInvalid("beta0 must be a finite nonnegative number");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw ConfigInvalid("kappa must lie in [0, 1)");
}

double beta_at(const BetaSchedule& schedule, std::int64_t t) {
  return schedule.beta0 * std::pow(1.0 - schedule.kappa, static_cast<double>(t));
}

double total_reward(double extrinsic, double intrinsic, double beta) { return extrinsic + beta * intrinsic; }

}  // namespace mem::exploration
