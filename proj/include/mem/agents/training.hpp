#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "mem/ad/checkpoint.hpp"
#include "mem/agents/config.hpp"
#include "mem/agents/policies.hpp"
#include "mem/agents/replay_buffer.hpp"
#include "mem/agents/representation.hpp"
#include "mem/agents/run_log.hpp"
#include "mem/envs/grid.hpp"

namespace mem::agents {

/// Everything recorded about one on-policy episode.
struct EpisodeTrace {
  std::vector<envs::MultiViewObs> observations;  // o_0 .. o_{T-1}
  std::vector<std::size_t> actions;
  std::vector<double> extrinsic;
  std::vector<double> intrinsic;
  double beta = 0.0;
};

struct RunHooks {
  std::function<void(const LogRow&)> on_row;
  /// Called every checkpoint_period steps/episodes with the current parameters.
  std::function<void(const ad::Checkpoint&, std::int64_t)> on_checkpoint;
  std::function<void(const EpisodeTrace&)> on_episode;
  /// Replaces action selection when set (scripted rollouts in tests).
  std::function<std::size_t(std::int64_t step)> scripted_action;
  /// Polled once per step (off-policy) or episode (on-policy); returning true
  /// ends the run early with RunLog::cancelled set.
  std::function<bool()> should_stop;
};

struct RunResult {
  RunLog log;
  ad::Checkpoint checkpoint;
};

/// Off-policy MEM loop: encode, act epsilon-greedily, store, sample a
/// minibatch, reward it, update Q against a periodically synced target, then
/// update the encoder. One log row per environment step.
RunResult train_off_policy(const RunConfig& config, std::uint64_t seed, const RunHooks& hooks = {});

/// On-policy MEM loop: roll out an episode, reward it against its own
/// features, update the actor-critic once, then the encoder. One log row per
/// episode.
RunResult train_on_policy(const RunConfig& config, std::uint64_t seed, const RunHooks& hooks = {});

RunResult train(const RunConfig& config, std::uint64_t seed, const RunHooks& hooks = {});

/// Greedy (off-policy) or mode (on-policy) policy rebuilt from a checkpoint.
class GreedyAgent {
 public:
  GreedyAgent(const RunConfig& config, const envs::GridSpec& env, const ad::Checkpoint& checkpoint);
  std::size_t act(const envs::MultiViewObs& obs) const;

 private:
  RunConfig config_;
  std::unique_ptr<Representation> rep_;
  std::unique_ptr<QNetwork> q_;
  std::unique_ptr<ActorCritic> ac_;
};

struct EvalStats {
  double mean_return = 0.0;
  double std_return = 0.0;  // population std; 0 for one episode
  double success_rate = 0.0;
  int episodes = 0;
};

using PolicyFn = std::function<std::size_t(const envs::GridEnv&, const envs::MultiViewObs&)>;

/// Runs `episodes` episodes on a fresh copy of the environment; episode e
/// uses noise seed mix64(base_seed + e). No intrinsic reward.
EvalStats evaluate_policy(const envs::GridSpec& spec, const PolicyFn& policy, int episodes, std::uint64_t base_seed);

}  // namespace mem::agents
