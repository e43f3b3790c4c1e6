#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mem/ad/checkpoint.hpp"
#include "mem/errors.hpp"
#include "mem/harness/bench.hpp"
#include "mem/harness/config_io.hpp"
#include "mem/harness/csv.hpp"
#include "mem/harness/experiment.hpp"

using namespace mem;
using namespace mem::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mem_harness_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

// Small off-policy run on a 5x5 grid.
std::string small_config_json(const fs::path& out, const std::string& seeds = "[1, 2]") {
  return R"({
    "env": {"height": 5, "width": 5, "wall_density": 0.1, "max_steps": 40},
    "encoder": {"hidden": 16, "feature_dim": 4},
    "agent": {"hidden": 16, "batch_size": 16, "warmup_steps": 60, "target_update_period": 50},
    "run": {"t_max": 150, "seeds": )" +
         seeds + R"(, "eval_period": 75, "eval_episodes": 2, "checkpoint_period": 100, "output_dir": ")" +
         out.string() + R"("}
  })";
}

std::uint64_t fnv1a_oracle(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) { ::setenv(name, value.c_str(), 1); }
  ~ScopedEnv() { ::unsetenv(name_); }

 private:
  const char* name_;
};

}  // namespace

TEST(Config, MinimalConfigMatchesGoldenDump) {
  const auto c = parse_config(R"({"env": {"seed": 3}})");
  EXPECT_EQ(dump_config(c), slurp(fs::path(MEM_TEST_DATA_DIR) / "resolved_minimal.json"));
}

TEST(Config, OnPolicyDefaults) {
  const auto c = parse_config(R"({"agent": {"loop": "on_policy"}})");
  EXPECT_EQ(c.exploration.k, 5u);
  EXPECT_EQ(c.exploration.beta0, 0.1);
  EXPECT_EQ(c.exploration.kappa, 1e-5);
  const auto d = parse_config(R"({"agent": {"loop": "on_policy"}, "exploration": {"k": 4}})");
  EXPECT_EQ(d.exploration.k, 4u);
}

TEST(Config, BatchNotLargerThanKRejected) {
  try {
    parse_config(R"({"agent": {"batch_size": 3}, "exploration": {"k": 3}})");
    FAIL() << "accepted";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "agent.batch_size");
  }
  EXPECT_NO_THROW(parse_config(R"({"agent": {"batch_size": 4}, "exploration": {"k": 3}})"));
}

TEST(Config, UnknownKeysRejectedByName) {
  for (const auto& [text, field] : std::vector<std::pair<std::string, std::string>>{
           {R"({"exploration": {"beta_zero": 0.1}})", "exploration.beta_zero"},
           {R"({"beta_zero": 0.1})", "beta_zero"},
           {R"({"env": {"seed": 1, "sead": 2}})", "env.sead"}}) {
    try {
      parse_config(text);
      FAIL() << text;
    } catch (const ValidationError& e) {
      EXPECT_EQ(e.field(), field);
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos);
    }
  }
}

TEST(Config, ParseErrorReportsPosition) {
  try {
    parse_config("{\"env\": {\"seed\": 3,}}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("byte 20"), std::string::npos) << e.what();
  }
}

TEST(Config, FieldValidation) {
  const std::vector<std::pair<std::string, std::string>> bad{
      {R"({"exploration": {"k": 2.5}})", "exploration.k"},
      {R"({"exploration": {"k": -1}})", "exploration.k"},
      {R"({"agent": {"gamma": 1.0}})", "agent.gamma"},
      {R"({"agent": {"loop": "sideways"}})", "agent.loop"},
      {R"({"env": {"views": []}})", "env.views"},
      {R"({"env": {"views": ["panoramic"]}})", "env.views"},
      {R"({"env": {"wall_density": 1.5}})", "env.wall_density"},
      {R"({"run": {"seeds": [1, 1]}})", "run.seeds"},
      {R"({"run": {"seeds": []}})", "run.seeds"},
      {R"({"run": {"eval_episodes": 0}})", "run.eval_episodes"},
      {R"({"exploration": {"kappa": 1.0}})", "exploration.kappa"},
      {R"({"exploration": {"reward_mode": "rnd"}})", "exploration.reward_mode"},
      {R"({"agent": {"state_mode": "onehot"}})", "agent.state_mode"},
      {R"({"encoder": {"margin": 0}})", "encoder.margin"},
      {R"({"env": "big"})", "env"},
      {R"({"env": {"height": 1}})", "env.height"},
  };
  for (const auto& [text, field] : bad) {
    try {
      parse_config(text);
      ADD_FAILURE() << "accepted " << text;
    } catch (const ValidationError& e) {
      EXPECT_EQ(e.field(), field) << text;
    }
  }
}

TEST(Config, ResolvedDumpRoundTrips) {
  const auto c = parse_config(R"({"env": {"seed": 9, "views": ["egocentric", "allocentric"], "reward_mode": "dense"},
                                  "exploration": {"reward_mode": "re3_log1p", "kappa": 3e-7},
                                  "agent": {"loop": "on_policy", "entropy_coef": 0.123456789012345678},
                                  "run": {"seeds": [4, 18446744073709551615]}})");
  const std::string dump = dump_config(c);
  const auto again = parse_config(dump);
  EXPECT_EQ(dump_config(again), dump);
  EXPECT_EQ(config_to_json(again), config_to_json(c));
  EXPECT_EQ(again.agent.entropy_coef, 0.123456789012345678);
  EXPECT_EQ(again.run.seeds.back(), 18446744073709551615ULL);
}

TEST(Config, HashIsFnvOfCanonicalDump) {
  const auto c = parse_config(R"({"env": {"seed": 3}})");
  std::string golden = slurp(fs::path(MEM_TEST_DATA_DIR) / "resolved_minimal.json");
  const std::string from = "\"output_dir\": \"runs\"";
  golden.replace(golden.find(from), from.size(), "\"output_dir\": \"\"");
  char want[17];
  std::snprintf(want, sizeof want, "%016llx", static_cast<unsigned long long>(fnv1a_oracle(golden)));
  EXPECT_EQ(config_hash(c), want);
  EXPECT_EQ(config_hash(c), "134d570544f9f9eb");

  auto moved = c;
  moved.run.output_dir = "/elsewhere";
  EXPECT_EQ(config_hash(moved), config_hash(c));
  auto changed = c;
  changed.exploration.beta0 = 0.06;
  EXPECT_NE(config_hash(changed), config_hash(c));
}

TEST(Config, LoadErrors) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
  const fs::path dir = scratch_dir("load");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"run": {"t_max": 12}})";
  EXPECT_EQ(load_config(dir / "c.json").run.t_max, 12);
  fs::remove_all(dir);
}

TEST(Config, ShippedConfigsLoad) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(MEM_CONFIG_DIR)) {
    SCOPED_TRACE(entry.path().string());
    const agents::RunConfig c = load_config(entry.path());
    EXPECT_NO_THROW(validate(c));
    EXPECT_FALSE(c.run.seeds.empty());
    ++count;
  }
  EXPECT_GE(count, 3);
  EXPECT_EQ(load_config(fs::path(MEM_CONFIG_DIR) / "on_policy.json").exploration.k, 5u);
}

TEST(Csv, HeaderAndRowFormat) {
  EXPECT_EQ(csv_header(),
            "step,episode,action,extrinsic_reward,intrinsic_reward,beta,total_reward,loss_diff,loss_con,loss_adv_d,"
            "loss_adv_g,policy_loss,disc_accuracy,eval_return\n");
  agents::LogRow r;
  r.step = 12;
  r.episode = 3;
  r.action = 2;
  r.extrinsic_reward = 1.0;
  r.intrinsic_reward = 0.1;
  r.beta = 0.05;
  r.total_reward = 1.0 + 0.05 * 0.1;
  r.policy_loss = -2.5e-300;
  EXPECT_EQ(csv_row(r), "12,3,2,1,0.10000000000000001,0.050000000000000003,1.0049999999999999,0,0,0,0,-2.5e-300,0,\n");
  r.eval_return = 0.75;
  EXPECT_EQ(csv_row(r).substr(csv_row(r).rfind(',')), ",0.75\n");
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  agents::LogRow r;
  r.beta = 0.05 * std::pow(1.0 - 1e-5, 12345.0);
  const std::string line = csv_row(r);
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  EXPECT_EQ(std::stod(cells[5]), r.beta);
}

TEST(Experiment, WritesPerSeedArtifacts) {
  const fs::path dir = scratch_dir("run");
  const auto c = parse_config(small_config_json(dir));
  const auto r = run_experiment(c, {2, ""});
  ASSERT_TRUE(r.all_ok());
  EXPECT_EQ(r.output_dir, dir);
  for (const char* f : {"config.json", "summary.json", "seed_1.csv", "seed_2.csv", "seed_1.ckpt", "seed_2.ckpt",
                        "seed_1_100.ckpt", "seed_2_100.ckpt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(slurp(dir / "config.json"), dump_config(c));
  EXPECT_EQ(parse_config(slurp(dir / "config.json")).run.seeds, c.run.seeds);
  const std::string csv = slurp(dir / "seed_1.csv");
  EXPECT_EQ(count_lines(csv), 151u);
  EXPECT_EQ(csv.substr(0, csv_header().size()), csv_header());
  EXPECT_EQ(csv.find("nan"), std::string::npos);
  EXPECT_EQ(csv.find("inf"), std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["config_hash"], config_hash(c));
  EXPECT_EQ(summary["seeds"].size(), 2u);
  EXPECT_TRUE(summary["all_ok"].get<bool>());
  EXPECT_EQ(summary["seeds"][1]["rows"], 150);
  fs::remove_all(dir);
}

TEST(Experiment, RerunIsByteIdentical) {
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  run_experiment(parse_config(small_config_json(a, "[5]")));
  run_experiment(parse_config(small_config_json(b, "[5]")));
  EXPECT_EQ(slurp(a / "seed_5.csv"), slurp(b / "seed_5.csv"));
  EXPECT_EQ(slurp(a / "seed_5.ckpt"), slurp(b / "seed_5.ckpt"));
  // Threads do not change per-seed output.
  const fs::path m = scratch_dir("det_m");
  run_experiment(parse_config(small_config_json(m, "[4, 5, 6]")), {3, ""});
  EXPECT_EQ(slurp(a / "seed_5.csv"), slurp(m / "seed_5.csv"));
  for (const auto& d : {a, b, m}) fs::remove_all(d);
}

TEST(Experiment, OutputDirOverride) {
  const fs::path configured = scratch_dir("cfg"), over = scratch_dir("over");
  {
    ScopedEnv env("MEM_OUT_DIR", over.string());
    const auto r = run_experiment(parse_config(small_config_json(configured, "[1]")));
    EXPECT_EQ(r.output_dir, over);
  }
  EXPECT_TRUE(fs::exists(over / "seed_1.csv"));
  EXPECT_FALSE(fs::exists(configured));
  fs::remove_all(over);
}

TEST(Experiment, FailingSeedIsIsolated) {
  // A directory squatting on seed 8's CSV path makes only that seed fail.
  const fs::path dir = scratch_dir("iso");
  fs::create_directories(dir / "seed_8.csv");
  const auto r = run_experiment(parse_config(small_config_json(dir, "[7, 8, 9]")), {2, ""});
  EXPECT_FALSE(r.all_ok());
  EXPECT_TRUE(r.seeds[0].ok);
  EXPECT_FALSE(r.seeds[1].ok);
  EXPECT_TRUE(r.seeds[2].ok);
  EXPECT_NE(r.seeds[1].error.find("seed_8.csv"), std::string::npos) << r.seeds[1].error;
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_FALSE(summary["all_ok"].get<bool>());
  EXPECT_EQ(summary["seeds"][1]["error"], r.seeds[1].error);
  EXPECT_EQ(count_lines(slurp(dir / "seed_9.csv")), 151u);
  fs::remove_all(dir);
}

TEST(Experiment, UnwritableOutputDir) {
  auto c = parse_config(small_config_json("/proc/mem_cannot_write_here", "[1]"));
  EXPECT_THROW(run_experiment(c), IoError);
}

TEST(Ablate, ModesShareEnvironmentSeeds) {
  const fs::path dir = scratch_dir("ablate");
  const auto c = parse_config(small_config_json(dir, "[3]"));
  const auto res = ablate(c, {agents::IntrinsicMode::mem, agents::IntrinsicMode::none}, {1, ""});
  ASSERT_EQ(res.size(), 2u);
  ASSERT_TRUE(res.at("mem").all_ok() && res.at("none").all_ok());
  std::ifstream a(dir / "mem" / "seed_3.csv"), b(dir / "none" / "seed_3.csv");
  std::string la, lb;
  std::getline(a, la);
  std::getline(b, lb);
  // During warm-up both modes act identically on the same layout, so actions
  // and extrinsic rewards agree row by row.
  for (long t = 0; t < c.agent.warmup_steps; ++t) {
    std::getline(a, la);
    std::getline(b, lb);
    std::stringstream sa(la), sb(lb);
    std::vector<std::string> ca, cb;
    for (std::string x; std::getline(sa, x, ',');) ca.push_back(x);
    for (std::string x; std::getline(sb, x, ',');) cb.push_back(x);
    ASSERT_GE(ca.size(), 4u);
    EXPECT_EQ(ca[2], cb[2]) << t;
    EXPECT_EQ(ca[3], cb[3]) << t;
  }
  EXPECT_NE(slurp(dir / "mem" / "seed_3.csv"), slurp(dir / "none" / "seed_3.csv"));
  fs::remove_all(dir);
}

TEST(Evaluate, CheckpointFromDisk) {
  const fs::path dir = scratch_dir("eval");
  const auto c = parse_config(small_config_json(dir, "[2]"));
  const auto r = run_experiment(c, {1, ""});
  ASSERT_TRUE(r.all_ok());
  const auto st = evaluate_checkpoint(dir / "seed_2.ckpt", c, 2, 3, 9);
  const envs::GridSpec spec = c.env_for_seed(2);
  const agents::GreedyAgent agent(c, spec, ad::load_checkpoint(dir / "seed_2.ckpt"));
  const auto want = agents::evaluate_policy(
      spec, [&](const envs::GridEnv&, const envs::MultiViewObs& o) { return agent.act(o); }, 3, 9);
  EXPECT_EQ(st.mean_return, want.mean_return);
  EXPECT_EQ(st.std_return, want.std_return);
  EXPECT_EQ(evaluate_checkpoint(dir / "seed_2.ckpt", c, 2, 1).std_return, 0.0);

  std::string bytes = slurp(dir / "seed_2.ckpt");
  std::ofstream(dir / "broken.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  EXPECT_THROW(evaluate_checkpoint(dir / "broken.ckpt", c, 2, 1), CheckpointCorrupt);
  fs::remove_all(dir);
}

TEST(EntropyBench, GaussianAndUniformTargets) {
  EntropyBenchOptions o;
  o.time_brute = false;
  const auto g = entropy_bench(o);
  EXPECT_NEAR(g.analytic, 1.4189385332046727, 1e-12);
  EXPECT_EQ(g.estimates.size(), 10u);
  EXPECT_LT(g.mean_abs_error, 0.1);
  o.distribution = BenchDistribution::uniform;
  o.q = 2;
  o.n = 2000;
  o.trials = 3;
  const auto u = entropy_bench(o);
  EXPECT_EQ(u.analytic, 0.0);
  EXPECT_LT(u.mean_abs_error, 0.1);
  o.k = o.n;
  EXPECT_THROW(entropy_bench(o), KTooLarge);
}

TEST(GradientSuite, EveryLossPasses) {
  const auto cases = gradient_suite(10, 77);
  EXPECT_EQ(cases.size(), 7u);
  for (const auto& c : cases) {
    EXPECT_LT(c.max_rel_error, 1e-4) << c.name << " " << c.worst;
    EXPECT_GT(c.checked, 0u) << c.name;
  }
}
