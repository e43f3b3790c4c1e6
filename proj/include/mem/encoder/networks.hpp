#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mem/ad/param_store.hpp"
#include "mem/ad/tape.hpp"
#include "mem/envs/multi_view_obs.hpp"
#include "mem/rng.hpp"

namespace mem::encoder {

struct EncoderConfig {
  std::size_t input_dim = 0;
  std::size_t hidden = 64;
  std::size_t feature_dim = 16;  // p
};

/// Shared-weight encoder applied to every view: a ReLU trunk followed by two
/// linear heads, each layer-normalized, giving shared (x) and specific (y)
/// features of dimension p.
class EncoderNet {
 public:
  struct Features {
    ad::Var shared;
    ad::Var specific;
  };

  EncoderNet(const EncoderConfig& config, Rng& init_rng);

  /// Rows of `obs` are individual view observations.
  Features forward(ad::Tape& tape, ad::Var obs);
  /// Tape-free forward; returns (shared, specific), one row per input row.
  std::pair<ad::Tensor, ad::Tensor> encode_rows(const ad::Tensor& obs) const;
  /// Single observation. Throws ShapeMismatch on a wrong length.
  std::pair<std::vector<double>, std::vector<double>> encode(std::span<const double> obs) const;

  const EncoderConfig& config() const noexcept { return config_; }
  ad::ParamStore& params() noexcept { return params_; }
  const ad::ParamStore& params() const noexcept { return params_; }

 private:
  EncoderConfig config_;
  ad::ParamStore params_;
};

/// Viewpoint classifier over shared features: p -> hidden (ReLU) -> N logits.
class DiscriminatorNet {
 public:
  DiscriminatorNet(std::size_t feature_dim, std::size_t hidden, std::size_t views, Rng& init_rng);

  /// With `trainable == false` the parameters enter the tape as constants.
  ad::Var logits(ad::Tape& tape, ad::Var shared, bool trainable);
  ad::Tensor logits_rows(const ad::Tensor& shared) const;
  /// Softmax over viewpoints for one feature vector.
  std::vector<double> probabilities(std::span<const double> shared) const;

  std::size_t views() const noexcept { return views_; }
  ad::ParamStore& params() noexcept { return params_; }
  const ad::ParamStore& params() const noexcept { return params_; }

 private:
  std::size_t views_;
  ad::ParamStore params_;
};

/// Shared and specific features of all N views of one timestep, plus the
/// mean of the shared features.
struct FeatureBundle {
  std::vector<std::vector<double>> shared;
  std::vector<std::vector<double>> specific;
  std::vector<double> shared_mean;
};

FeatureBundle make_bundle(std::vector<std::vector<double>> shared, std::vector<std::vector<double>> specific);
FeatureBundle encode_views(const EncoderNet& net, const envs::MultiViewObs& obs);

/// Concatenation y^1, ..., y^N, xbar; length (N+1)p.
std::vector<double> assemble_state(const FeatureBundle& bundle);

/// Stacks a batch of multi-view observations into rows ordered
/// (sample 0 view 0, sample 0 view 1, ...). `labels` receives the view index
/// of each row when non-null.
ad::Tensor stack_views(const std::vector<const envs::MultiViewObs*>& batch, std::vector<std::size_t>* labels);

}  // namespace mem::encoder
