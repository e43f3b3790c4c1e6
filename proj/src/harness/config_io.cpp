#include "mem/harness/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "mem/errors.hpp"
#include "mem/rng.hpp"

namespace mem::harness {

using nlohmann::json;
using agents::RunConfig;

namespace {

// Reads one JSON section, tracking which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : path_(std::move(path)) {
    if (!j.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
    j_ = &j;
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_->contains(key); }

  const json* get(const std::string& key) {
    used_.insert(key);
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw ValidationError(field(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ValidationError(field(key), "must be finite");
    }
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) throw ValidationError(field(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
          out = static_cast<Int>(v->get<std::uint64_t>());
          return;
        }
        if (v->get<std::int64_t>() < 0) throw ValidationError(field(key), "must be >= 0");
      }
      out = static_cast<Int>(v->get<std::int64_t>());
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) throw ValidationError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  template <class Enum>
  void enumeration(const std::string& key, Enum& out, Enum (*parse)(const std::string&)) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ValidationError(field(key), "expected a string");
      try {
        out = parse(v->get<std::string>());
      } catch (const ConfigInvalid& e) {
        throw ValidationError(field(key), e.what());
      } catch (const InvalidSpec& e) {
        throw ValidationError(field(key), e.what());
      }
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ValidationError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void reject_unknown() const {
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!used_.count(it.key())) throw ValidationError(field(it.key()), "unknown key");
    }
  }

 private:
  const json* j_ = nullptr;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& field, const std::string& reason) {
  if (!ok) throw ValidationError(field, reason);
}

}  // namespace

void validate(const RunConfig& c) {
  const auto& e = c.env;
  require(e.height >= 2, "env.height", "must be >= 2");
  require(e.width >= 2, "env.width", "must be >= 2");
  require(e.wall_density >= 0.0 && e.wall_density <= 0.3, "env.wall_density", "must be in [0, 0.3]");
  require(std::isfinite(e.goal_reward), "env.goal_reward", "must be finite");
  require(e.step_penalty >= 0.0, "env.step_penalty", "must be >= 0");
  require(e.max_steps >= 1, "env.max_steps", "must be >= 1");
  require(!e.views.empty(), "env.views", "needs at least one view");
  require(e.egocentric_radius >= 0, "env.egocentric_radius", "must be >= 0");
  require(e.noise_probability >= 0.0 && e.noise_probability <= 1.0, "env.noise_probability", "must be in [0, 1]");
  try {
    e.validate();
  } catch (const InvalidSpec& err) {
    throw ValidationError("env", err.what());
  }

  require(c.encoder.hidden >= 1, "encoder.hidden", "must be >= 1");
  require(c.encoder.feature_dim >= 1, "encoder.feature_dim", "must be >= 1");
  const auto& w = c.encoder.weights;
  require(w.lambda1 >= 0.0, "encoder.lambda1", "must be >= 0");
  require(w.lambda2 >= 0.0, "encoder.lambda2", "must be >= 0");
  require(w.lambda3 >= 0.0, "encoder.lambda3", "must be >= 0");
  require(w.margin > 0.0, "encoder.margin", "must be > 0");
  require(c.encoder.learning_rate >= 0.0, "encoder.learning_rate", "must be >= 0 (0 selects the loop default)");

  const auto& x = c.exploration;
  require(x.k >= 1, "exploration.k", "must be >= 1");
  require(x.beta0 >= 0.0, "exploration.beta0", "must be >= 0");
  require(x.kappa >= 0.0 && x.kappa < 1.0, "exploration.kappa", "must be in [0, 1)");

  const auto& a = c.agent;
  require(a.gamma >= 0.0 && a.gamma < 1.0, "agent.gamma", "must be in [0, 1)");
  require(a.learning_rate >= 0.0, "agent.learning_rate", "must be >= 0 (0 selects the loop default)");
  require(a.hidden >= 1, "agent.hidden", "must be >= 1");
  require(a.batch_size > x.k, "agent.batch_size",
          "must exceed exploration.k (" + std::to_string(x.k) + ") so the k-NN pool is valid");
  require(a.replay_capacity >= a.batch_size, "agent.replay_capacity", "must be >= agent.batch_size");
  require(a.warmup_steps >= 0, "agent.warmup_steps", "must be >= 0");
  require(a.update_every >= 1, "agent.update_every", "must be >= 1");
  require(a.target_update_period >= 1, "agent.target_update_period", "must be >= 1");
  require(a.epsilon_start >= 0.0 && a.epsilon_start <= 1.0, "agent.epsilon_start", "must be in [0, 1]");
  require(a.epsilon_end >= 0.0 && a.epsilon_end <= 1.0, "agent.epsilon_end", "must be in [0, 1]");
  require(a.epsilon_decay_steps >= 1, "agent.epsilon_decay_steps", "must be >= 1");
  require(a.entropy_coef >= 0.0, "agent.entropy_coef", "must be >= 0");
  require(a.value_coef >= 0.0, "agent.value_coef", "must be >= 0");
  if (a.state_mode == agents::StateMode::onehot) {
    require(x.mode == agents::IntrinsicMode::none, "agent.state_mode", "onehot needs exploration.reward_mode none");
    require(e.views.front() == envs::ViewKind::allocentric, "agent.state_mode", "onehot needs an allocentric first view");
  }

  const auto& r = c.run;
  require(r.t_max >= 1, "run.t_max", "must be >= 1");
  require(r.episodes >= 1, "run.episodes", "must be >= 1");
  require(!r.seeds.empty(), "run.seeds", "needs at least one seed");
  require(std::set<std::uint64_t>(r.seeds.begin(), r.seeds.end()).size() == r.seeds.size(), "run.seeds",
          "seeds must be distinct");
  require(r.eval_period >= 0, "run.eval_period", "must be >= 0");
  require(r.eval_episodes >= 1, "run.eval_episodes", "must be >= 1");
  require(r.success_threshold >= 0.0 && r.success_threshold <= 1.0, "run.success_threshold", "must be in [0, 1]");
  require(r.checkpoint_period >= 0, "run.checkpoint_period", "must be >= 0");
  require(!r.output_dir.empty(), "run.output_dir", "must not be empty");
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Section root(j, "");
  const json empty = json::object();
  auto section = [&](const char* name) { const json* s = root.get(name); return Section(s ? *s : empty, name); };

  Section agent = section("agent");
  agent.enumeration("loop", c.agent.loop, agents::loop_variant_from_string);
  if (c.agent.loop == agents::LoopVariant::on_policy) {
    c.exploration.k = 5;
    c.exploration.beta0 = 0.1;
  }
  agent.enumeration("state_mode", c.agent.state_mode, agents::state_mode_from_string);
  agent.number("gamma", c.agent.gamma);
  agent.number("learning_rate", c.agent.learning_rate);
  agent.integer("hidden", c.agent.hidden);
  agent.integer("batch_size", c.agent.batch_size);
  agent.integer("replay_capacity", c.agent.replay_capacity);
  agent.integer("warmup_steps", c.agent.warmup_steps);
  agent.integer("update_every", c.agent.update_every);
  agent.integer("target_update_period", c.agent.target_update_period);
  agent.number("epsilon_start", c.agent.epsilon_start);
  agent.number("epsilon_end", c.agent.epsilon_end);
  agent.integer("epsilon_decay_steps", c.agent.epsilon_decay_steps);
  agent.number("entropy_coef", c.agent.entropy_coef);
  agent.number("value_coef", c.agent.value_coef);
  agent.reject_unknown();

  Section env = section("env");
  env.integer("height", c.env.height);
  env.integer("width", c.env.width);
  env.number("wall_density", c.env.wall_density);
  env.number("goal_reward", c.env.goal_reward);
  env.number("step_penalty", c.env.step_penalty);
  env.integer("max_steps", c.env.max_steps);
  env.enumeration("reward_mode", c.env.reward_mode, envs::reward_mode_from_string);
  if (const json* v = env.get("views")) {
    if (!v->is_array()) throw ValidationError("env.views", "expected an array of view names");
    c.env.views.clear();
    for (const auto& name : *v) {
      if (!name.is_string()) throw ValidationError("env.views", "expected view names");
      try {
        c.env.views.push_back(envs::view_kind_from_string(name.get<std::string>()));
      } catch (const Error& e) {
        throw ValidationError("env.views", e.what());
      }
    }
  }
  env.integer("seed", c.env.seed);
  env.integer("egocentric_radius", c.env.egocentric_radius);
  env.number("noise_probability", c.env.noise_probability);
  env.reject_unknown();

  Section enc = section("encoder");
  enc.integer("hidden", c.encoder.hidden);
  enc.integer("feature_dim", c.encoder.feature_dim);
  enc.number("lambda1", c.encoder.weights.lambda1);
  enc.number("lambda2", c.encoder.weights.lambda2);
  enc.number("lambda3", c.encoder.weights.lambda3);
  enc.number("margin", c.encoder.weights.margin);
  enc.number("learning_rate", c.encoder.learning_rate);
  enc.reject_unknown();

  Section x = section("exploration");
  x.integer("k", c.exploration.k);
  x.number("beta0", c.exploration.beta0);
  x.number("kappa", c.exploration.kappa);
  x.enumeration("reward_mode", c.exploration.mode, agents::intrinsic_mode_from_string);
  x.reject_unknown();

  Section run = section("run");
  run.integer("t_max", c.run.t_max);
  run.integer("episodes", c.run.episodes);
  if (const json* v = run.get("seeds")) {
    if (!v->is_array()) throw ValidationError("run.seeds", "expected an array of integers");
    c.run.seeds.clear();
    for (const auto& s : *v) {
      if (!s.is_number_unsigned()) throw ValidationError("run.seeds", "seeds must be non-negative integers");
      c.run.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  run.integer("eval_period", c.run.eval_period);
  run.integer("eval_episodes", c.run.eval_episodes);
  run.number("success_threshold", c.run.success_threshold);
  run.boolean("stop_at_success", c.run.stop_at_success);
  run.integer("checkpoint_period", c.run.checkpoint_period);
  run.text("output_dir", c.run.output_dir);
  run.reject_unknown();

  root.reject_unknown();
  validate(c);
  return c;
}

json config_to_json(const RunConfig& c) {
  json views = json::array();
  for (auto v : c.env.views) views.push_back(envs::to_string(v));
  return {
      {"env",
       {{"height", c.env.height},
        {"width", c.env.width},
        {"wall_density", c.env.wall_density},
        {"goal_reward", c.env.goal_reward},
        {"step_penalty", c.env.step_penalty},
        {"max_steps", c.env.max_steps},
        {"reward_mode", envs::to_string(c.env.reward_mode)},
        {"views", views},
        {"seed", c.env.seed},
        {"egocentric_radius", c.env.egocentric_radius},
        {"noise_probability", c.env.noise_probability}}},
      {"encoder",
       {{"hidden", c.encoder.hidden},
        {"feature_dim", c.encoder.feature_dim},
        {"lambda1", c.encoder.weights.lambda1},
        {"lambda2", c.encoder.weights.lambda2},
        {"lambda3", c.encoder.weights.lambda3},
        {"margin", c.encoder.weights.margin},
        {"learning_rate", c.encoder.learning_rate}}},
      {"exploration",
       {{"k", c.exploration.k},
        {"beta0", c.exploration.beta0},
        {"kappa", c.exploration.kappa},
        {"reward_mode", agents::to_string(c.exploration.mode)}}},
      {"agent",
       {{"loop", agents::to_string(c.agent.loop)},
        {"state_mode", agents::to_string(c.agent.state_mode)},
        {"gamma", c.agent.gamma},
        {"learning_rate", c.agent.learning_rate},
        {"hidden", c.agent.hidden},
        {"batch_size", c.agent.batch_size},
        {"replay_capacity", c.agent.replay_capacity},
        {"warmup_steps", c.agent.warmup_steps},
        {"update_every", c.agent.update_every},
        {"target_update_period", c.agent.target_update_period},
        {"epsilon_start", c.agent.epsilon_start},
        {"epsilon_end", c.agent.epsilon_end},
        {"epsilon_decay_steps", c.agent.epsilon_decay_steps},
        {"entropy_coef", c.agent.entropy_coef},
        {"value_coef", c.agent.value_coef}}},
      {"run",
       {{"t_max", c.run.t_max},
        {"episodes", c.run.episodes},
        {"seeds", c.run.seeds},
        {"eval_period", c.run.eval_period},
        {"eval_episodes", c.run.eval_episodes},
        {"success_threshold", c.run.success_threshold},
        {"stop_at_success", c.run.stop_at_success},
        {"checkpoint_period", c.run.checkpoint_period},
        {"output_dir", c.run.output_dir}}},
  };
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& config) { return config_to_json(config).dump(2) + "\n"; }

std::string config_hash(const RunConfig& config) {
  RunConfig c = config;
  c.run.output_dir.clear();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(dump_config(c))));
  return buf;
}

}  // namespace mem::harness
