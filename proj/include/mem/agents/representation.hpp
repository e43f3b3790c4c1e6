#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mem/ad/checkpoint.hpp"
#include "mem/agents/config.hpp"
#include "mem/encoder/trainer.hpp"

namespace mem::agents {

/// Everything between raw multi-view observations and the policy: the
/// encoder pair and its trainer, state assembly, and intrinsic rewards.
class Representation {
 public:
  struct Encoded {
    ad::Tensor shared;    // one row per (sample, view)
    ad::Tensor specific;
    std::size_t samples = 0;
    std::size_t views = 0;
  };

  Representation(const RunConfig& config, const envs::GridSpec& env, Rng& init_rng, std::uint64_t run_seed);
  Representation(const Representation&) = delete;
  Representation& operator=(const Representation&) = delete;

  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t views() const noexcept { return views_; }

  /// `rows` is sample-major, view-minor (see encoder::stack_views).
  Encoded encode(const ad::Tensor& rows) const;
  ad::Tensor states(const ad::Tensor& rows, const Encoded& encoded) const;
  std::vector<double> state(const envs::MultiViewObs& obs) const;

  /// Intrinsic reward of every sample, with the samples as the k-NN pool.
  /// All zeros for mode none or a pool of at most k samples.
  std::vector<double> intrinsic(const ad::Tensor& rows, const Encoded& encoded) const;

  /// One encoder/discriminator update; nothing to do in onehot mode.
  std::optional<encoder::StepLosses> train(const ad::Tensor& rows);

  void export_to(ad::Checkpoint& ckpt) const;
  void import_from(const ad::Checkpoint& ckpt);

 private:
  IntrinsicMode mode_;
  StateMode state_mode_;
  std::size_t k_;
  std::size_t views_;
  std::size_t grid_cells_;
  std::size_t state_dim_;
  std::unique_ptr<encoder::EncoderNet> encoder_;
  std::unique_ptr<encoder::DiscriminatorNet> disc_;
  std::unique_ptr<encoder::EncoderTrainer> trainer_;
  std::unique_ptr<encoder::EncoderNet> random_encoder_;  // frozen, single-view baselines
};

}  // namespace mem::agents
