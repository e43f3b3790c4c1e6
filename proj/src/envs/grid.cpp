#include "mem/envs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "mem/errors.hpp"
#include "mem/rng.hpp"

namespace mem::envs {

namespace {

constexpr int kDr[4] = {-1, 1, 0, 0};
constexpr int kDc[4] = {0, 0, -1, 1};

}  // namespace

void GridSpec::validate() const {
  if (height < 2 || width < 2) throw InvalidSpec("grid must be at least 2x2");
  if (!(wall_density >= 0.0 && wall_density <= 0.3)) throw InvalidSpec("wall_density must lie in [0, 0.3]");
  if (max_steps < 1) throw InvalidSpec("max_steps must be positive");
  if (!std::isfinite(goal_reward) || !std::isfinite(step_penalty)) throw InvalidSpec("rewards must be finite");
  if (views.empty()) throw InvalidSpec("at least one view is required");
  if (egocentric_radius < 0) throw InvalidSpec("egocentric_radius must be >= 0");
  if (!(noise_probability >= 0.0 && noise_probability <= 1.0)) throw InvalidSpec("noise_probability must lie in [0, 1]");
}

std::size_t GridSpec::view_length(ViewKind kind) const {
  const auto cells = static_cast<std::size_t>(height * width);
  const auto side = static_cast<std::size_t>(2 * egocentric_radius + 1);
  switch (kind) {
    case ViewKind::allocentric: return 3 * cells;
    case ViewKind::egocentric: return 2 * side * side;
    case ViewKind::noisy_allocentric: return 4 * cells;
  }
  return 0;
}

std::size_t GridSpec::input_dim() const {
  std::size_t d = 0;
  for (ViewKind v : views) d = std::max(d, view_length(v));
  return d;
}

std::string Layout::to_text() const {
  std::string s;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Cell cell{r, c};
      s += cell == start ? 'S' : cell == goal ? 'G' : is_wall(r, c) ? '#' : '.';
    }
    s += '\n';
  }
  return s;
}

std::uint64_t Layout::hash() const { return fnv1a(to_text()); }

Cell move(const Layout& layout, Cell from, Action a) {
  const int i = static_cast<int>(a);
  const Cell to{from.row + kDr[i], from.col + kDc[i]};
  if (!layout.inside(to.row, to.col) || layout.is_wall(to.row, to.col)) return from;
  return to;
}

std::vector<Action> bfs_path(const Layout& layout, Cell from, Cell to) {
  const auto idx = [&](Cell c) { return static_cast<std::size_t>(c.row * layout.width + c.col); };
  std::vector<int> via(static_cast<std::size_t>(layout.height * layout.width), -1);
  std::vector<char> seen(via.size(), 0);
  std::deque<Cell> queue{from};
  seen[idx(from)] = 1;
  while (!queue.empty() && !seen[idx(to)]) {
    const Cell c = queue.front();
    queue.pop_front();
    for (int a = 0; a < 4; ++a) {
      const Cell n = move(layout, c, static_cast<Action>(a));
      if (seen[idx(n)]) continue;
      seen[idx(n)] = 1;
      via[idx(n)] = a;
      queue.push_back(n);
    }
  }
  if (!seen[idx(to)]) throw InvalidSpec("goal unreachable");
  std::vector<Action> path;
  for (Cell c = to; !(c == from);) {
    const int a = via[idx(c)];
    path.push_back(static_cast<Action>(a));
    c = {c.row - kDr[a], c.col - kDc[a]};
  }
  std::reverse(path.begin(), path.end());
  return path;
}

Layout generate_layout(const GridSpec& spec) {
  spec.validate();
  Rng rng = Rng::stream(spec.seed, "layout");
  Layout layout{spec.height, spec.width, {}, {0, 0}, {spec.height - 1, spec.width - 1}};
  for (int attempt = 0; attempt < 100; ++attempt) {
    layout.walls.assign(static_cast<std::size_t>(spec.height * spec.width), 0);
    for (std::size_t i = 0; i < layout.walls.size(); ++i) layout.walls[i] = rng.bernoulli(spec.wall_density) ? 1 : 0;
    layout.walls[0] = 0;
    layout.walls.back() = 0;
    try {
      bfs_path(layout, layout.start, layout.goal);
      return layout;
    } catch (const InvalidSpec&) {
    }
  }
  throw InvalidSpec("no reachable layout after 100 attempts");
}

GridEnv::GridEnv(GridSpec spec)
    : spec_(std::move(spec)),
      layout_(generate_layout(spec_)),
      input_dim_(spec_.input_dim()),
      agent_(layout_.start),
      noise_seed_(spec_.seed) {}

MultiViewObs GridEnv::reset() {
  agent_ = layout_.start;
  episode_step_ = 0;
  done_ = false;
  return render();
}

StepResult GridEnv::step(Action a) {
  if (done_) throw EpisodeFinished("step after episode end; call reset()");
  if (static_cast<int>(a) < 0 || static_cast<int>(a) >= static_cast<int>(kActionCount)) {
    throw IndexOutOfRange("action outside [0, 4)");
  }
  agent_ = move(layout_, agent_, a);
  ++episode_step_;
  ++total_steps_;
  StepResult r;
  r.reached_goal = agent_ == layout_.goal;
  if (r.reached_goal) {
    r.extrinsic_reward = spec_.goal_reward;
  } else if (spec_.reward_mode == RewardMode::dense) {
    r.extrinsic_reward = -spec_.step_penalty;
  }
  done_ = r.reached_goal || episode_step_ >= spec_.max_steps;
  r.done = done_;
  r.obs = render();
  r.info = {{"episode_step", episode_step_}, {"agent_row", agent_.row}, {"agent_col", agent_.col}};
  return r;
}

MultiViewObs GridEnv::render() const {
  MultiViewObs obs;
  for (ViewKind v : spec_.views) {
    auto view = render_view(v);
    view.resize(input_dim_, 0.0);
    obs.views.push_back(std::move(view));
  }
  return obs;
}

std::vector<double> GridEnv::render_view(ViewKind kind) const {
  const int h = layout_.height, w = layout_.width;
  const std::size_t cells = static_cast<std::size_t>(h * w);
  if (kind == ViewKind::egocentric) {
    const int rad = spec_.egocentric_radius, side = 2 * rad + 1;
    const std::size_t plane = static_cast<std::size_t>(side * side);
    std::vector<double> v(2 * plane, 0.0);
    for (int dr = -rad; dr <= rad; ++dr) {
      for (int dc = -rad; dc <= rad; ++dc) {
        const int r = agent_.row + dr, c = agent_.col + dc;
        const auto i = static_cast<std::size_t>((dr + rad) * side + (dc + rad));
        if (!layout_.inside(r, c) || layout_.is_wall(r, c)) v[i] = 1.0;
        if (Cell{r, c} == layout_.goal) v[plane + i] = 1.0;
      }
    }
    return v;
  }
  std::vector<double> v(kind == ViewKind::allocentric ? 3 * cells : 4 * cells, 0.0);
  v[static_cast<std::size_t>(agent_.row * w + agent_.col)] = 1.0;
  v[cells + static_cast<std::size_t>(layout_.goal.row * w + layout_.goal.col)] = 1.0;
  for (std::size_t i = 0; i < cells; ++i) v[2 * cells + i] = layout_.walls[i] ? 1.0 : 0.0;
  if (kind == ViewKind::noisy_allocentric) {
    Rng noise(mix64(noise_seed_ ^ mix64(total_steps_ + 0x6e6f697365ULL)));
    for (std::size_t i = 0; i < cells; ++i) v[3 * cells + i] = noise.bernoulli(spec_.noise_probability) ? 1.0 : 0.0;
  }
  return v;
}

const char* to_string(RewardMode m) { return m == RewardMode::dense ? "dense" : "sparse"; }

const char* to_string(ViewKind v) {
  switch (v) {
    case ViewKind::allocentric: return "allocentric";
    case ViewKind::egocentric: return "egocentric";
    case ViewKind::noisy_allocentric: return "noisy_allocentric";
  }
  return "?";
}

RewardMode reward_mode_from_string(const std::string& s) {
  if (s == "dense") return RewardMode::dense;
  if (s == "sparse") return RewardMode::sparse;
  throw InvalidSpec("unknown reward mode '" + s + "'");
}

ViewKind view_kind_from_string(const std::string& s) {
  if (s == "allocentric") return ViewKind::allocentric;
  if (s == "egocentric") return ViewKind::egocentric;
  if (s == "noisy_allocentric") return ViewKind::noisy_allocentric;
  throw InvalidSpec("unknown view '" + s + "'");
}

}  // namespace mem::envs
