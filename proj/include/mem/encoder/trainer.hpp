#pragma once

#include <vector>

#include "mem/ad/adam.hpp"
#include "mem/encoder/losses.hpp"
#include "mem/encoder/networks.hpp"

namespace mem::encoder {

struct TrainerConfig {
  LossWeights weights;
  double encoder_learning_rate = 1e-4;
  double discriminator_learning_rate = 1e-4;
};

struct StepLosses {
  double l_diff = 0.0;
  double l_con = 0.0;
  double l_adv_d = 0.0;
  double l_adv_g = 0.0;
  double l_total = 0.0;
  double disc_accuracy = 0.0;
};

/// Owns the optimizer state for one encoder/discriminator pair.
class EncoderTrainer {
 public:
  EncoderTrainer(EncoderNet& encoder, DiscriminatorNet& disc, TrainerConfig config);

  /// One alternating update: a discriminator step on detached shared
  /// features, then an encoder step on
  /// lambda1 L_diff + lambda2 L_con + lambda3 L_adv(uniform target).
  /// Returns the loss values seen before each update. With a single view the
  /// contrastive term is dropped.
  StepLosses step(const std::vector<const envs::MultiViewObs*>& batch);
  StepLosses step(const ad::Tensor& rows, const std::vector<std::size_t>& labels);

  const TrainerConfig& config() const noexcept { return config_; }
  long steps() const noexcept { return encoder_opt_.steps(); }

 private:
  EncoderNet& encoder_;
  DiscriminatorNet& disc_;
  TrainerConfig config_;
  ad::Adam encoder_opt_;
  ad::Adam disc_opt_;
};

/// Stateless single step, for callers that do not keep optimizer state
/// (each call starts Adam from zero moments).
StepLosses encoder_train_step(EncoderNet& encoder, DiscriminatorNet& disc,
                              const std::vector<const envs::MultiViewObs*>& batch, const LossWeights& weights,
                              double learning_rate);

}  // namespace mem::encoder
