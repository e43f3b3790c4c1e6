#pragma once

#include <vector>

namespace mem::envs {

/// One timestep's observation from each of N viewpoints, every view padded to
/// the same length.
struct MultiViewObs {
  std::vector<std::vector<double>> views;

  std::size_t view_count() const noexcept { return views.size(); }
  std::size_t input_dim() const noexcept { return views.empty() ? 0 : views.front().size(); }
  friend bool operator==(const MultiViewObs&, const MultiViewObs&) = default;
};

}  // namespace mem::envs
