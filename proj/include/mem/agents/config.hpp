#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mem/encoder/losses.hpp"
#include "mem/envs/grid.hpp"

namespace mem::agents {

enum class IntrinsicMode { mem, re3_raw, re3_log1p, none };
enum class LoopVariant { off_policy, on_policy };
/// `onehot` bypasses the encoder: the state is the agent plane of view 0.
enum class StateMode { encoder, onehot };

struct EncoderSettings {
  std::size_t hidden = 64;
  std::size_t feature_dim = 16;
  encoder::LossWeights weights;
  /// Zero selects the loop default: 1e-4 off-policy, 5e-4 on-policy.
  double learning_rate = 0.0;
};

struct ExplorationSettings {
  std::size_t k = 3;
  double beta0 = 0.05;
  double kappa = 1e-5;
  IntrinsicMode mode = IntrinsicMode::mem;
};

struct AgentConfig {
  LoopVariant loop = LoopVariant::off_policy;
  StateMode state_mode = StateMode::encoder;
  double gamma = 0.99;
  /// Zero selects the loop default: 1e-4 off-policy, 5e-4 on-policy.
  double learning_rate = 0.0;
  std::size_t hidden = 64;
  std::size_t batch_size = 256;
  // off-policy
  std::size_t replay_capacity = 500000;
  long warmup_steps = 2000;
  long update_every = 1;
  long target_update_period = 500;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long epsilon_decay_steps = 10000;
  // on-policy
  double entropy_coef = 0.01;
  double value_coef = 0.5;
};

struct RunSettings {
  long t_max = 100000;    // off-policy environment steps
  long episodes = 500;    // on-policy episodes
  std::vector<std::uint64_t> seeds{0};
  long eval_period = 1000;  // steps (off-policy) or episodes (on-policy); 0 disables
  int eval_episodes = 10;
  /// Greedy success rate recorded as "reached" in the run log.
  double success_threshold = 0.9;
  /// End the run at the first evaluation reaching success_threshold.
  bool stop_at_success = false;
  long checkpoint_period = 0;
  std::string output_dir = "runs";
};

struct RunConfig {
  envs::GridSpec env;
  EncoderSettings encoder;
  ExplorationSettings exploration;
  AgentConfig agent;
  RunSettings run;

  double encoder_learning_rate() const;
  double agent_learning_rate() const;
  /// Environment spec of one seed: the layout seed is env.seed + run_seed.
  envs::GridSpec env_for_seed(std::uint64_t run_seed) const;
};

const char* to_string(IntrinsicMode m);
const char* to_string(LoopVariant v);
const char* to_string(StateMode s);
IntrinsicMode intrinsic_mode_from_string(const std::string& s);
LoopVariant loop_variant_from_string(const std::string& s);
StateMode state_mode_from_string(const std::string& s);

}  // namespace mem::agents
