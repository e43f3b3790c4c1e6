#include "mem/agents/config.hpp"

#include "mem/errors.hpp"

namespace mem::agents {

double RunConfig::encoder_learning_rate() const {
  if (encoder.learning_rate > 0.0) return encoder.learning_rate;
  return agent.loop == LoopVariant::off_policy ? 1e-4 : 5e-4;
}

double RunConfig::agent_learning_rate() const {
  if (agent.learning_rate > 0.0) return agent.learning_rate;
  return agent.loop == LoopVariant::off_policy ? 1e-4 : 5e-4;
}

envs::GridSpec RunConfig::env_for_seed(std::uint64_t run_seed) const {
  envs::GridSpec s = env;
  s.seed = env.seed + run_seed;
  return s;
}

const char* to_string(IntrinsicMode m) {
  switch (m) {
    case IntrinsicMode::mem: return "mem";
    case IntrinsicMode::re3_raw: return "re3_raw";
    case IntrinsicMode::re3_log1p: return "re3_log1p";
    case IntrinsicMode::none: return "none";
  }
  return "?";
}

const char* to_string(LoopVariant v) { return v == LoopVariant::off_policy ? "off_policy" : "on_policy"; }
const char* to_string(StateMode s) { return s == StateMode::encoder ? "encoder" : "onehot"; }

IntrinsicMode intrinsic_mode_from_string(const std::string& s) {
  for (auto m : {IntrinsicMode::mem, IntrinsicMode::re3_raw, IntrinsicMode::re3_log1p, IntrinsicMode::none}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigInvalid("unknown reward mode '" + s + "'");
}

LoopVariant loop_variant_from_string(const std::string& s) {
  if (s == "off_policy") return LoopVariant::off_policy;
  if (s == "on_policy") return LoopVariant::on_policy;
  throw ConfigInvalid("unknown loop variant '" + s + "'");
}

StateMode state_mode_from_string(const std::string& s) {
  if (s == "encoder") return StateMode::encoder;
  if (s == "onehot") return StateMode::onehot;
  throw ConfigInvalid("unknown state mode '" + s + "'");
}

}  // namespace mem::agents
