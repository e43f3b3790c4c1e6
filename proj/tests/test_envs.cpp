#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "mem/envs/grid.hpp"
#include "mem/errors.hpp"
#include "mem/rng.hpp"

using namespace mem;
using namespace mem::envs;

namespace {

std::vector<std::size_t> nonzero(const std::vector<double>& v) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) idx.push_back(i);
  }
  return idx;
}

GridSpec fixture_spec() {
  GridSpec s;
  s.seed = 7;
  return s;
}

// Independent reachability check: flood fill by repeated relaxation.
bool reachable(const Layout& l) {
  std::vector<char> on(l.walls.size(), 0);
  on[0] = 1;
  for (bool changed = true; changed;) {
    changed = false;
    for (int r = 0; r < l.height; ++r)
      for (int c = 0; c < l.width; ++c) {
        if (on[static_cast<std::size_t>(r * l.width + c)] || l.is_wall(r, c)) continue;
        const bool near = (r > 0 && on[static_cast<std::size_t>((r - 1) * l.width + c)]) ||
                          (r + 1 < l.height && on[static_cast<std::size_t>((r + 1) * l.width + c)]) ||
                          (c > 0 && on[static_cast<std::size_t>(r * l.width + c - 1)]) ||
                          (c + 1 < l.width && on[static_cast<std::size_t>(r * l.width + c + 1)]);
        if (near) on[static_cast<std::size_t>(r * l.width + c)] = changed = true;
      }
  }
  return on.back() != 0;
}

}  // namespace

TEST(MakeEnv, SameSpecSameLayout) {
  GridEnv a(fixture_spec()), b(fixture_spec());
  EXPECT_EQ(a.layout().to_text(), b.layout().to_text());
  GridSpec other = fixture_spec();
  other.seed = 8;
  EXPECT_NE(GridEnv(other).layout().to_text(), a.layout().to_text());
}

TEST(MakeEnv, OpenGridShortestPathIsManhattan) {
  GridSpec s;
  s.wall_density = 0.0;
  for (int h : {2, 5, 11}) {
    s.height = h;
    s.width = h + 1;
    const Layout l = generate_layout(s);
    EXPECT_EQ(bfs_path(l, l.start, l.goal).size(), static_cast<std::size_t>(h - 1 + h));
  }
}

TEST(MakeEnv, FixtureLayoutGolden) {
  const Layout l = GridEnv(fixture_spec()).layout();
  EXPECT_EQ(l.to_text(),
            "S.##......#\n"
            "....#...#.#\n"
            "..#..#...#.\n"
            ".....#.....\n"
            "..#..##.#..\n"
            "...#.......\n"
            "..#........\n"
            "..#.##.....\n"
            "....#.....#\n"
            "..........#\n"
            "...#......G\n");
  EXPECT_EQ(l.hash(), 0xa8a15eaf6c558a30ULL);
}

TEST(MakeEnv, LayoutsAreAlwaysSolvable) {
  GridSpec s;
  s.wall_density = 0.3;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    s.seed = seed;
    try {
      const Layout l = generate_layout(s);
      EXPECT_TRUE(reachable(l)) << seed;
      EXPECT_FALSE(l.is_wall(0, 0));
      EXPECT_FALSE(l.is_wall(10, 10));
    } catch (const InvalidSpec&) {
      ADD_FAILURE() << "seed " << seed << " exhausted attempts";
    }
  }
}

TEST(MakeEnv, BadSpecs) {
  GridSpec s;
  s.wall_density = 0.5;
  EXPECT_THROW(GridEnv{s}, InvalidSpec);
  s = {};
  s.height = 1;
  EXPECT_THROW(GridEnv{s}, InvalidSpec);
  s = {};
  s.views.clear();
  EXPECT_THROW(GridEnv{s}, InvalidSpec);
}

TEST(MakeEnv, CommonInputDim) {
  GridSpec s;
  EXPECT_EQ(s.input_dim(), 4u * 121u);
  GridEnv env(s);
  for (const auto& v : env.reset().views) EXPECT_EQ(v.size(), 484u);
  s.views = {ViewKind::egocentric};
  EXPECT_EQ(s.input_dim(), 50u);
}

TEST(Reset, SingleAgentCellAndRepeatable) {
  GridEnv env(fixture_spec());
  const auto a = env.reset();
  const auto b = env.reset();
  EXPECT_EQ(a, b);
  const auto& v1 = a.views[0];
  EXPECT_EQ(std::accumulate(v1.begin(), v1.begin() + 121, 0.0), 1.0);
  EXPECT_EQ(v1[0], 1.0);
  EXPECT_EQ(env.agent(), (Cell{0, 0}));
  EXPECT_EQ(env.episode_step(), 0);
}

TEST(Reset, EgocentricGolden) {
  GridEnv env(fixture_spec());
  const auto o = env.reset();
  // Agent at (0,0): rows -2..-1 and columns -2..-1 are padding; row 0 has
  // a wall at column 2, as does row 2.
  const std::vector<std::size_t> walls{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 14, 15, 16, 20, 21, 24};
  EXPECT_EQ(nonzero(o.views[1]), walls);
}

TEST(RenderViews, FixtureStateGolden) {
  GridEnv env(fixture_spec());
  env.reset();
  for (Action a : {Action::down, Action::right, Action::right}) env.step(a);
  ASSERT_EQ(env.agent(), (Cell{1, 2}));
  const auto o = env.render();
  const std::vector<std::size_t> v1{13,  241, 244, 245, 252, 257, 261, 263, 266, 269, 273, 280, 288,
                                    291, 292, 294, 300, 310, 321, 323, 324, 334, 340, 351, 355};
  const std::vector<std::size_t> v2{0, 1, 2, 3, 4, 7, 8, 14, 17};
  std::vector<std::size_t> v3 = v1;
  for (std::size_t i : {380, 385, 396, 399, 405, 406, 407, 425, 430, 438, 458, 461, 469}) v3.push_back(i);
  EXPECT_EQ(nonzero(o.views[0]), v1);
  EXPECT_EQ(nonzero(o.views[1]), v2);
  EXPECT_EQ(nonzero(o.views[2]), v3);
}

TEST(RenderViews, NoisyViewAgreesOnStatePlanes) {
  GridEnv env(fixture_spec());
  env.reset();
  Rng rng(3);
  for (int t = 0; t < 50 && !env.done(); ++t) {
    const auto o = env.step(static_cast<Action>(rng.uniform_int(4))).obs;
    EXPECT_TRUE(std::equal(o.views[0].begin(), o.views[0].begin() + 363, o.views[2].begin()));
    EXPECT_TRUE(std::all_of(o.views[0].begin() + 363, o.views[0].end(), [](double x) { return x == 0.0; }));
  }
}

TEST(RenderViews, NoiseIsAFunctionOfSeedAndStep) {
  GridEnv a(fixture_spec()), b(fixture_spec());
  a.reset();
  b.reset();
  a.step(Action::right);
  b.step(Action::down);
  // Different states, same step index: identical noise plane.
  const auto na = a.render().views[2], nb = b.render().views[2];
  EXPECT_TRUE(std::equal(na.begin() + 363, na.end(), nb.begin() + 363));
  EXPECT_EQ(a.render(), a.render());
  a.step(Action::right);
  const auto later = a.render().views[2];
  EXPECT_FALSE(std::equal(na.begin() + 363, na.end(), later.begin() + 363));
}

TEST(RenderViews, EgocentricBorderPaddingIsWall) {
  GridSpec s;
  s.wall_density = 0.0;
  GridEnv env(s);
  const auto v = env.reset().views[1];
  // Agent in the top-left corner: the first two crop rows and columns are outside.
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) EXPECT_EQ(v[static_cast<std::size_t>(r * 5 + c)], (r < 2 || c < 2) ? 1.0 : 0.0);
}

TEST(Step, WallAndBorderBlock) {
  GridEnv env(fixture_spec());
  env.reset();
  auto r = env.step(Action::up);
  EXPECT_EQ(env.agent(), (Cell{0, 0}));
  EXPECT_EQ(r.extrinsic_reward, 0.0);
  env.step(Action::right);
  r = env.step(Action::right);  // (0,2) is a wall
  EXPECT_EQ(env.agent(), (Cell{0, 1}));
  EXPECT_EQ(r.info.at("episode_step"), 3);

  GridSpec dense = fixture_spec();
  dense.reward_mode = RewardMode::dense;
  GridEnv d(dense);
  d.reset();
  EXPECT_DOUBLE_EQ(d.step(Action::left).extrinsic_reward, -0.001);
}

TEST(Step, ShortestPathSparseRewardOnlyAtEnd) {
  GridEnv env(fixture_spec());
  env.reset();
  const auto path = bfs_path(env.layout(), env.layout().start, env.layout().goal);
  EXPECT_EQ(path.size(), 20u);
  int nonzero_rewards = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto r = env.step(path[i]);
    if (r.extrinsic_reward != 0.0) {
      ++nonzero_rewards;
      EXPECT_EQ(i, path.size() - 1);
      EXPECT_EQ(r.extrinsic_reward, 1.0);
    }
    EXPECT_EQ(r.done, i == path.size() - 1);
  }
  EXPECT_EQ(nonzero_rewards, 1);
  EXPECT_THROW(env.step(Action::up), EpisodeFinished);
}

TEST(Step, CapEndsEpisode) {
  GridSpec s = fixture_spec();
  s.max_steps = 30;
  GridEnv env(s);
  env.reset();
  int steps = 0;
  StepResult r;
  while (!env.done()) {
    r = env.step(steps % 2 ? Action::up : Action::left);
    ++steps;
  }
  EXPECT_EQ(steps, 30);
  EXPECT_TRUE(r.done);
  EXPECT_FALSE(r.reached_goal);
}

TEST(Step, DeterministicUnderActionStream) {
  auto run = [] {
    GridEnv env(fixture_spec());
    Rng rng(99);
    std::vector<double> trace;
    for (int ep = 0; ep < 3; ++ep) {
      env.reset();
      while (!env.done()) {
        const auto r = env.step(static_cast<Action>(rng.uniform_int(4)));
        trace.push_back(r.extrinsic_reward);
        trace.insert(trace.end(), r.obs.views[2].begin(), r.obs.views[2].end());
      }
    }
    return trace;
  };
  EXPECT_EQ(run(), run());
}

TEST(Step, SparseReturnIsZeroOrGoalReward) {
  GridEnv env(fixture_spec());
  Rng rng(5);
  for (int ep = 0; ep < 30; ++ep) {
    env.reset();
    double ret = 0.0;
    int len = 0;
    while (!env.done()) {
      ret += env.step(static_cast<Action>(rng.uniform_int(4))).extrinsic_reward;
      ++len;
    }
    EXPECT_TRUE(ret == 0.0 || ret == 1.0);
    EXPECT_LE(len, 200);
  }
}

TEST(LayoutText, UsesDocumentedCharacters) {
  const std::string t = GridEnv(fixture_spec()).layout().to_text();
  const std::set<char> allowed{'#', '.', 'S', 'G', '\n'};
  for (char c : t) EXPECT_TRUE(allowed.count(c));
  EXPECT_EQ(std::count(t.begin(), t.end(), 'S'), 1);
  EXPECT_EQ(std::count(t.begin(), t.end(), 'G'), 1);
}
