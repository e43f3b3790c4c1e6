#pragma once

#include <span>
#include <vector>

#include "mem/ad/param_store.hpp"
#include "mem/ad/tape.hpp"
#include "mem/rng.hpp"

namespace mem::agents {

/// state -> hidden (ReLU) -> hidden (ReLU) -> one output per action.
class QNetwork {
 public:
  QNetwork(std::size_t state_dim, std::size_t hidden, std::size_t actions, Rng& init_rng);

  ad::Var q(ad::Tape& tape, ad::Var states);
  ad::Tensor q_values(const ad::Tensor& states) const;
  std::vector<double> q_values(std::span<const double> state) const;

  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t actions() const noexcept { return actions_; }
  ad::ParamStore& params() noexcept { return params_; }
  const ad::ParamStore& params() const noexcept { return params_; }

 private:
  std::size_t state_dim_;
  std::size_t actions_;
  ad::ParamStore params_;
};

/// Separate actor (policy logits) and critic (state value) MLPs.
class ActorCritic {
 public:
  ActorCritic(std::size_t state_dim, std::size_t hidden, std::size_t actions, Rng& init_rng);

  ad::Var logits(ad::Tape& tape, ad::Var states);
  ad::Var values(ad::Tape& tape, ad::Var states);
  ad::Tensor logits_rows(const ad::Tensor& states) const;
  ad::Tensor values_rows(const ad::Tensor& states) const;
  std::vector<double> probabilities(std::span<const double> state) const;

  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t actions() const noexcept { return actions_; }
  ad::ParamStore& params() noexcept { return params_; }
  const ad::ParamStore& params() const noexcept { return params_; }

 private:
  std::size_t state_dim_;
  std::size_t actions_;
  ad::ParamStore params_;
};

/// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const double> values);

/// Uniform random action with probability epsilon, else greedy. The uniform
/// draw is always taken so the stream position does not depend on epsilon.
std::size_t epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng);
std::size_t sample_categorical(std::span<const double> probabilities, Rng& rng);

/// Linear decay from start to end over `decay_steps`, then constant.
double epsilon_at(double start, double end, long decay_steps, long t);

/// r + gamma * (1 - done) * max_a Q_target(s', a), one entry per row.
std::vector<double> td_targets(const QNetwork& target, const ad::Tensor& next_states,
                               const std::vector<double>& rewards, const std::vector<char>& done, double gamma);

/// mean (Q(s, a) - y)^2.
ad::Var td_loss(ad::Tape& tape, QNetwork& online, const ad::Tensor& states, const std::vector<std::size_t>& actions,
                const std::vector<double>& targets);

struct A2cCoefficients {
  double value = 0.5;
  double entropy = 0.01;
};

/// -mean(A * log pi(a|s)) + c_v * mean((G - V(s))^2) - c_e * mean(H(pi(.|s))),
/// with advantages A supplied as constants.
ad::Var a2c_loss(ad::Tape& tape, ActorCritic& net, const ad::Tensor& states, const std::vector<std::size_t>& actions,
                 const std::vector<double>& returns, const std::vector<double>& advantages,
                 const A2cCoefficients& coefficients);

}  // namespace mem::agents
