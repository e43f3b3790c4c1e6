#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mem::agents {

/// One environment step (off-policy) or one episode (on-policy). Loss fields
/// hold the last update's values and are 0 before the first update.
struct LogRow {
  std::int64_t step = 0;
  std::int64_t episode = 0;
  int action = 0;
  double extrinsic_reward = 0.0;
  double intrinsic_reward = 0.0;
  double beta = 0.0;
  double total_reward = 0.0;
  double loss_diff = 0.0;
  double loss_con = 0.0;
  double loss_adv_d = 0.0;
  double loss_adv_g = 0.0;
  double policy_loss = 0.0;
  double disc_accuracy = 0.0;
  std::optional<double> eval_return;
  std::optional<double> eval_success;  // not written to CSV
};

struct RunLog {
  std::vector<LogRow> rows;
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_seconds = 0.0;
  /// Environment steps taken when an evaluation first reached the success
  /// threshold, if any.
  std::optional<std::int64_t> reached_success_at;
  /// Ended by RunHooks::should_stop before t_max steps or E episodes.
  bool cancelled = false;
};

}  // namespace mem::agents
