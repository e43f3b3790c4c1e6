#include "mem/agents/training.hpp"

#include <chrono>
#include <cmath>

#include "mem/ad/adam.hpp"
#include "mem/errors.hpp"
#include "mem/exploration/intrinsic.hpp"

namespace mem::agents {

using ad::Tape;
using ad::Tensor;

namespace {

void check_loop_config(const RunConfig& c) {
  if (!(c.agent.gamma >= 0.0 && c.agent.gamma < 1.0)) throw ConfigInvalid("gamma must lie in [0, 1)");
  if (c.exploration.k == 0) throw ConfigInvalid("k must be positive");
  if (c.agent.batch_size <= c.exploration.k) throw ConfigInvalid("batch_size must exceed k");
  exploration::BetaSchedule{c.exploration.beta0, c.exploration.kappa}.validate();
}

void apply_losses(LogRow& row, const encoder::StepLosses& l) {
  row.loss_diff = l.l_diff;
  row.loss_con = l.l_con;
  row.loss_adv_d = l.l_adv_d;
  row.loss_adv_g = l.l_adv_g;
  row.disc_accuracy = l.disc_accuracy;
}

void carry_losses(LogRow& row, const LogRow& from) {
  row.loss_diff = from.loss_diff;
  row.loss_con = from.loss_con;
  row.loss_adv_d = from.loss_adv_d;
  row.loss_adv_g = from.loss_adv_g;
  row.policy_loss = from.policy_loss;
  row.disc_accuracy = from.disc_accuracy;
}

void copy_rows(const Tensor& src, std::size_t first, std::size_t count, Tensor& dst) {
  std::copy(src.data().begin() + static_cast<std::ptrdiff_t>(first * src.cols()),
            src.data().begin() + static_cast<std::ptrdiff_t>((first + count) * src.cols()), dst.data().begin());
}

std::uint64_t eval_base_seed(std::uint64_t seed) { return mix64(seed ^ fnv1a("eval")); }

ad::Checkpoint snapshot(const Representation& rep, const ad::ParamStore& policy, const std::string& prefix) {
  ad::Checkpoint c;
  rep.export_to(c);
  policy.export_to(c, prefix);
  return c;
}

// Records one evaluation into `row`; returns true when the run should stop.
bool evaluate_into(LogRow& row, RunLog& log, const RunConfig& cfg, const envs::GridSpec& spec, const PolicyFn& policy,
                   std::uint64_t seed, std::int64_t env_steps) {
  const EvalStats st = evaluate_policy(spec, policy, cfg.run.eval_episodes, eval_base_seed(seed));
  row.eval_return = st.mean_return;
  row.eval_success = st.success_rate;
  if (st.success_rate >= cfg.run.success_threshold && !log.reached_success_at) {
    log.reached_success_at = env_steps;
    return cfg.run.stop_at_success;
  }
  return false;
}

}  // namespace

RunResult train_off_policy(const RunConfig& cfg, std::uint64_t seed, const RunHooks& hooks) {
  check_loop_config(cfg);
  const auto start = std::chrono::steady_clock::now();
  const envs::GridSpec spec = cfg.env_for_seed(seed);
  envs::GridEnv env(spec);
  Rng init = Rng::stream(seed, "init");
  Rng action_rng = Rng::stream(seed, "action");
  Rng buffer_rng = Rng::stream(seed, "buffer");

  Representation rep(cfg, spec, init, seed);
  QNetwork online(rep.state_dim(), cfg.agent.hidden, envs::kActionCount, init);
  QNetwork target = online;
  ad::Adam q_opt(ad::AdamConfig{.learning_rate = cfg.agent_learning_rate()});
  ReplayBuffer buffer(cfg.agent.replay_capacity);
  const exploration::BetaSchedule schedule{cfg.exploration.beta0, cfg.exploration.kappa};

  const std::size_t B = cfg.agent.batch_size, V = spec.views.size(), D = spec.input_dim();
  Tensor pool_rows = Tensor::matrix((B + 1) * V, D);  // current observation, then the minibatch
  Tensor next_rows = Tensor::matrix(B * V, D);
  Tensor batch_rows = Tensor::matrix(B * V, D);
  std::vector<std::size_t> actions(B);
  std::vector<double> rewards(B);
  std::vector<char> done(B);

  RunResult result;
  RunLog& log = result.log;
  log.seed = seed;
  LogRow last;
  long updates = 0;
  std::int64_t episode = 0;
  envs::MultiViewObs obs = env.reset();
  const PolicyFn greedy = [&](const envs::GridEnv&, const envs::MultiViewObs& o) {
    return argmax(online.q_values(rep.state(o)));
  };

  for (std::int64_t t = 0; t < cfg.run.t_max; ++t) {
    if (hooks.should_stop && hooks.should_stop()) {
      log.cancelled = true;
      break;
    }
    LogRow row;
    row.step = t;
    row.episode = episode;
    row.beta = exploration::beta_at(schedule, t);
    carry_losses(row, last);

    std::size_t a;
    if (hooks.scripted_action) {
      a = hooks.scripted_action(t);
    } else {
      const double eps = t < cfg.agent.warmup_steps
                             ? 1.0
                             : epsilon_at(cfg.agent.epsilon_start, cfg.agent.epsilon_end, cfg.agent.epsilon_decay_steps, t);
      a = epsilon_greedy(online.q_values(rep.state(obs)), eps, action_rng);
    }
    const envs::StepResult res = env.step(static_cast<envs::Action>(a));
    buffer.push({obs, a, res.extrinsic_reward, res.obs, res.reached_goal});
    row.action = static_cast<int>(a);
    row.extrinsic_reward = res.extrinsic_reward;

    if (t >= cfg.agent.warmup_steps && buffer.size() >= B && (t - cfg.agent.warmup_steps) % cfg.agent.update_every == 0) {
      const auto idx = buffer.sample_indices(B, buffer_rng);
      for (std::size_t v = 0; v < V; ++v) std::copy(obs.views[v].begin(), obs.views[v].end(), pool_rows.row(v).begin());
      buffer.stack_into(idx, false, pool_rows, V);
      buffer.stack_into(idx, true, next_rows, 0);

      const auto enc = rep.encode(pool_rows);
      const Tensor pool_states = rep.states(pool_rows, enc);
      const std::vector<double> r_hat = rep.intrinsic(pool_rows, enc);
      row.intrinsic_reward = r_hat[0];
      Tensor states = Tensor::matrix(B, rep.state_dim());
      copy_rows(pool_states, 1, B, states);
      const Tensor next_states = rep.states(next_rows, rep.encode(next_rows));
      for (std::size_t j = 0; j < B; ++j) {
        actions[j] = buffer.action(idx[j]);
        rewards[j] = exploration::total_reward(buffer.reward(idx[j]), r_hat[j + 1], row.beta);
        done[j] = buffer.done(idx[j]) ? 1 : 0;
      }
      const auto y = td_targets(target, next_states, rewards, done, cfg.agent.gamma);
      {
        Tape tape;
        auto loss = td_loss(tape, online, states, actions, y);
        row.policy_loss = loss.value().item();
        online.params().zero_grad();
        tape.backward(loss);
        q_opt.step(online.params());
      }
      if (++updates % cfg.agent.target_update_period == 0) target.params().copy_values_from(online.params());
      copy_rows(pool_rows, V, B * V, batch_rows);
      if (auto l = rep.train(batch_rows)) apply_losses(row, *l);
    }
    row.total_reward = exploration::total_reward(row.extrinsic_reward, row.intrinsic_reward, row.beta);

    if (res.done) {
      obs = env.reset();
      ++episode;
    } else {
      obs = res.obs;
    }
    bool stop = false;
    if (cfg.run.eval_period > 0 && (t + 1) % cfg.run.eval_period == 0) {
      stop = evaluate_into(row, log, cfg, spec, greedy, seed, t + 1);
    }
    if (hooks.on_checkpoint && cfg.run.checkpoint_period > 0 && (t + 1) % cfg.run.checkpoint_period == 0) {
      hooks.on_checkpoint(snapshot(rep, online.params(), "q."), t + 1);
    }
    if (hooks.on_row) hooks.on_row(row);
    log.rows.push_back(row);
    last = row;
    if (stop) break;
  }
  result.checkpoint = snapshot(rep, online.params(), "q.");
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunResult train_on_policy(const RunConfig& cfg, std::uint64_t seed, const RunHooks& hooks) {
  check_loop_config(cfg);
  const auto start = std::chrono::steady_clock::now();
  const envs::GridSpec spec = cfg.env_for_seed(seed);
  envs::GridEnv env(spec);
  Rng init = Rng::stream(seed, "init");
  Rng action_rng = Rng::stream(seed, "action");

  Representation rep(cfg, spec, init, seed);
  ActorCritic ac(rep.state_dim(), cfg.agent.hidden, envs::kActionCount, init);
  ad::Adam opt(ad::AdamConfig{.learning_rate = cfg.agent_learning_rate()});
  const exploration::BetaSchedule schedule{cfg.exploration.beta0, cfg.exploration.kappa};
  const A2cCoefficients coef{cfg.agent.value_coef, cfg.agent.entropy_coef};

  RunResult result;
  RunLog& log = result.log;
  log.seed = seed;
  LogRow last;
  std::int64_t env_steps = 0;
  const PolicyFn mode_policy = [&](const envs::GridEnv&, const envs::MultiViewObs& o) {
    return argmax(ac.probabilities(rep.state(o)));
  };

  for (std::int64_t ep = 0; ep < cfg.run.episodes; ++ep) {
    if (hooks.should_stop && hooks.should_stop()) {
      log.cancelled = true;
      break;
    }
    EpisodeTrace trace;
    trace.beta = exploration::beta_at(schedule, ep);
    envs::MultiViewObs obs = env.reset();
    bool terminal = false;
    while (!env.done()) {
      std::size_t a;
      if (hooks.scripted_action) {
        a = hooks.scripted_action(env_steps);
      } else {
        a = sample_categorical(ac.probabilities(rep.state(obs)), action_rng);
      }
      const auto res = env.step(static_cast<envs::Action>(a));
      trace.observations.push_back(std::move(obs));
      trace.actions.push_back(a);
      trace.extrinsic.push_back(res.extrinsic_reward);
      terminal = res.reached_goal;
      obs = res.obs;
      ++env_steps;
    }
    const std::size_t T = trace.actions.size();
    std::vector<const envs::MultiViewObs*> ptrs;
    for (const auto& o : trace.observations) ptrs.push_back(&o);
    const Tensor rows = encoder::stack_views(ptrs, nullptr);
    const auto enc = rep.encode(rows);
    const Tensor states = rep.states(rows, enc);
    trace.intrinsic = rep.intrinsic(rows, enc);

    LogRow row;
    row.step = env_steps;
    row.episode = ep;
    row.action = static_cast<int>(trace.actions.back());
    row.beta = trace.beta;
    carry_losses(row, last);
    std::vector<double> totals(T);
    for (std::size_t t = 0; t < T; ++t) {
      totals[t] = exploration::total_reward(trace.extrinsic[t], trace.intrinsic[t], trace.beta);
      row.extrinsic_reward += trace.extrinsic[t];
      row.intrinsic_reward += trace.intrinsic[t];
      row.total_reward += totals[t];
    }

    // Truncated episodes bootstrap from the critic; goal arrival is terminal.
    double g = terminal ? 0.0 : ac.values_rows(Tensor({1, rep.state_dim()}, rep.state(obs))).item();
    std::vector<double> returns(T), advantages(T);
    const Tensor v = ac.values_rows(states);
    for (std::size_t t = T; t-- > 0;) {
      g = totals[t] + cfg.agent.gamma * g;
      returns[t] = g;
      advantages[t] = g - v[t];
    }
    {
      Tape tape;
      auto loss = a2c_loss(tape, ac, states, trace.actions, returns, advantages, coef);
      row.policy_loss = loss.value().item();
      ac.params().zero_grad();
      tape.backward(loss);
      opt.step(ac.params());
    }
    if (auto l = rep.train(rows)) apply_losses(row, *l);

    bool stop = false;
    if (cfg.run.eval_period > 0 && (ep + 1) % cfg.run.eval_period == 0) {
      stop = evaluate_into(row, log, cfg, spec, mode_policy, seed, env_steps);
    }
    if (hooks.on_checkpoint && cfg.run.checkpoint_period > 0 && (ep + 1) % cfg.run.checkpoint_period == 0) {
      hooks.on_checkpoint(snapshot(rep, ac.params(), "policy."), ep + 1);
    }
    if (hooks.on_episode) hooks.on_episode(trace);
    if (hooks.on_row) hooks.on_row(row);
    log.rows.push_back(row);
    last = row;
    if (stop) break;
  }
  result.checkpoint = snapshot(rep, ac.params(), "policy.");
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunResult train(const RunConfig& config, std::uint64_t seed, const RunHooks& hooks) {
  return config.agent.loop == LoopVariant::off_policy ? train_off_policy(config, seed, hooks)
                                                      : train_on_policy(config, seed, hooks);
}

GreedyAgent::GreedyAgent(const RunConfig& config, const envs::GridSpec& env, const ad::Checkpoint& checkpoint)
    : config_(config) {
  Rng init(0);
  rep_ = std::make_unique<Representation>(config, env, init, 0);
  rep_->import_from(checkpoint);
  if (config.agent.loop == LoopVariant::off_policy) {
    q_ = std::make_unique<QNetwork>(rep_->state_dim(), config.agent.hidden, envs::kActionCount, init);
    q_->params().import_from(checkpoint, "q.");
  } else {
    ac_ = std::make_unique<ActorCritic>(rep_->state_dim(), config.agent.hidden, envs::kActionCount, init);
    ac_->params().import_from(checkpoint, "policy.");
  }
}

std::size_t GreedyAgent::act(const envs::MultiViewObs& obs) const {
  const auto s = rep_->state(obs);
  return q_ ? argmax(q_->q_values(s)) : argmax(ac_->probabilities(s));
}

EvalStats evaluate_policy(const envs::GridSpec& spec, const PolicyFn& policy, int episodes, std::uint64_t base_seed) {
  if (episodes < 1) throw ConfigInvalid("episodes must be >= 1");
  envs::GridEnv env(spec);
  std::vector<double> returns;
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    env.set_noise_seed(mix64(base_seed + static_cast<std::uint64_t>(e)));
    auto obs = env.reset();
    double ret = 0.0;
    bool success = false;
    while (!env.done()) {
      const auto res = env.step(static_cast<envs::Action>(policy(env, obs)));
      ret += res.extrinsic_reward;
      success = success || res.reached_goal;
      obs = res.obs;
    }
    returns.push_back(ret);
    successes += success ? 1 : 0;
  }
  EvalStats st;
  st.episodes = episodes;
  double sum = 0.0;
  for (double r : returns) sum += r;
  st.mean_return = sum / episodes;
  double var = 0.0;
  for (double r : returns) var += (r - st.mean_return) * (r - st.mean_return);
  st.std_return = std::sqrt(var / episodes);
  st.success_rate = static_cast<double>(successes) / episodes;
  return st;
}

}  // namespace mem::agents
