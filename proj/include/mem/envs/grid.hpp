#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mem/envs/multi_view_obs.hpp"

namespace mem::envs {

enum class RewardMode { dense, sparse };
enum class ViewKind { allocentric, egocentric, noisy_allocentric };
enum class Action : int { up = 0, down = 1, left = 2, right = 3 };
inline constexpr std::size_t kActionCount = 4;

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridSpec {
  int height = 11;
  int width = 11;
  double wall_density = 0.15;
  double goal_reward = 1.0;
  double step_penalty = 0.001;
  int max_steps = 200;
  RewardMode reward_mode = RewardMode::sparse;
  std::vector<ViewKind> views{ViewKind::allocentric, ViewKind::egocentric, ViewKind::noisy_allocentric};
  std::uint64_t seed = 0;
  int egocentric_radius = 2;
  double noise_probability = 0.1;

  /// Throws InvalidSpec.
  void validate() const;
  /// Length of a single view's native encoding.
  std::size_t view_length(ViewKind kind) const;
  /// Common padded length of every view.
  std::size_t input_dim() const;
};

struct StepResult {
  MultiViewObs obs;
  double extrinsic_reward = 0.0;
  bool done = false;
  bool reached_goal = false;
  std::map<std::string, int> info;  // "episode_step", "agent_row", "agent_col"
};

/// Walls as a row-major boolean grid.
struct Layout {
  int height = 0;
  int width = 0;
  std::vector<char> walls;
  Cell start;
  Cell goal;

  bool is_wall(int r, int c) const { return walls[static_cast<std::size_t>(r * width + c)] != 0; }
  bool inside(int r, int c) const { return r >= 0 && c >= 0 && r < height && c < width; }
  /// Rows of `#` wall, `.` floor, `S` start, `G` goal, newline-terminated.
  std::string to_text() const;
  std::uint64_t hash() const;
};

/// Moves one cell unless blocked by a wall or the border.
Cell move(const Layout& layout, Cell from, Action a);

/// Breadth-first shortest path as an action list (neighbor order up, down,
/// left, right); empty when `from == to`. Throws InvalidSpec if unreachable.
std::vector<Action> bfs_path(const Layout& layout, Cell from, Cell to);

/// Seeded layout with a guaranteed start-goal path; start (0,0), goal at the
/// opposite corner. Throws InvalidSpec after 100 failed attempts.
Layout generate_layout(const GridSpec& spec);

class GridEnv {
 public:
  explicit GridEnv(GridSpec spec);

  MultiViewObs reset();
  StepResult step(Action a);
  MultiViewObs render() const;

  /// Seed of the noise plane; defaults to the spec seed.
  void set_noise_seed(std::uint64_t seed) { noise_seed_ = seed; }

  const GridSpec& spec() const noexcept { return spec_; }
  const Layout& layout() const noexcept { return layout_; }
  Cell agent() const noexcept { return agent_; }
  int episode_step() const noexcept { return episode_step_; }
  /// Steps taken since construction, across episodes; indexes the noise plane.
  std::uint64_t total_steps() const noexcept { return total_steps_; }
  bool done() const noexcept { return done_; }
  std::size_t input_dim() const noexcept { return input_dim_; }

 private:
  std::vector<double> render_view(ViewKind kind) const;

  GridSpec spec_;
  Layout layout_;
  std::size_t input_dim_;
  Cell agent_;
  int episode_step_ = 0;
  std::uint64_t total_steps_ = 0;
  std::uint64_t noise_seed_;
  bool done_ = false;
};

const char* to_string(RewardMode m);
const char* to_string(ViewKind v);
RewardMode reward_mode_from_string(const std::string& s);
ViewKind view_kind_from_string(const std::string& s);

}  // namespace mem::envs
