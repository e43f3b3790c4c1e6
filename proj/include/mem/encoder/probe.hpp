#pragma once

#include <vector>

#include "mem/ad/tensor.hpp"
#include "mem/envs/multi_view_obs.hpp"
#include "mem/rng.hpp"

namespace mem::encoder {

struct ProbeOptions {
  double test_fraction = 0.3;
  int iterations = 300;
  double learning_rate = 0.5;
  double l2 = 1e-4;
};

struct ProbeResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Multinomial logistic regression on z-scored features (statistics from the
/// training split), trained by full-batch gradient descent; reports held-out
/// accuracy.
ProbeResult linear_probe(const ad::Tensor& features, const std::vector<std::size_t>& labels, std::size_t classes,
                         Rng& rng, const ProbeOptions& options = {});

struct OffsetViewsSpec {
  std::size_t views = 2;
  std::size_t latent_dim = 8;
  double offset_scale = 1.0;
};

/// Per-view offsets drawn once from N(0, offset_scale^2).
std::vector<std::vector<double>> draw_view_offsets(const OffsetViewsSpec& spec, Rng& rng);

/// `count` samples; each has a latent z ~ N(0, I) and view i observes
/// z + offsets[i].
std::vector<envs::MultiViewObs> sample_offset_views(const std::vector<std::vector<double>>& offsets,
                                                    std::size_t count, Rng& rng);

}  // namespace mem::encoder
