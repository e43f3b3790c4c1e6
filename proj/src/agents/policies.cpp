#include "mem/agents/policies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mem/ad/layers.hpp"
#include "mem/errors.hpp"

namespace mem::agents {

using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

Tensor row_tensor(std::span<const double> v) { return Tensor({1, v.size()}, std::vector<double>(v.begin(), v.end())); }

void check_width(const Tensor& states, std::size_t dim) {
  if (states.cols() != dim) {
    throw ShapeMismatch("state dimension " + std::to_string(states.cols()) + ", expected " + std::to_string(dim));
  }
}

Tensor mlp_rows(const ad::ParamStore& ps, const std::string& prefix, const Tensor& x) {
  Tensor h = ad::linear_forward(ps, prefix + "1", x);
  ad::relu_inplace(h);
  h = ad::linear_forward(ps, prefix + "2", h);
  ad::relu_inplace(h);
  return ad::linear_forward(ps, prefix + "3", h);
}

Var mlp(Tape& tape, ad::ParamStore& ps, const std::string& prefix, Var x) {
  Var h = ad::relu(ad::linear(tape, ps, prefix + "1", x));
  h = ad::relu(ad::linear(tape, ps, prefix + "2", h));
  return ad::linear(tape, ps, prefix + "3", h);
}

void init_mlp(ad::ParamStore& ps, const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out,
              Rng& rng) {
  ad::init_linear(ps, prefix + "1", in, hidden, rng, std::sqrt(2.0));
  ad::init_linear(ps, prefix + "2", hidden, hidden, rng, std::sqrt(2.0));
  ad::init_linear(ps, prefix + "3", hidden, out, rng);
}

}  // namespace

QNetwork::QNetwork(std::size_t state_dim, std::size_t hidden, std::size_t actions, Rng& init_rng)
    : state_dim_(state_dim), actions_(actions) {
  if (state_dim == 0 || hidden == 0 || actions == 0) throw ShapeMismatch("Q-network dimensions must be positive");
  init_mlp(params_, "q", state_dim, hidden, actions, init_rng);
}

Var QNetwork::q(Tape& tape, Var states) {
  check_width(states.value(), state_dim_);
  return mlp(tape, params_, "q", states);
}

Tensor QNetwork::q_values(const Tensor& states) const {
  check_width(states, state_dim_);
  return mlp_rows(params_, "q", states);
}

std::vector<double> QNetwork::q_values(std::span<const double> state) const {
  return q_values(row_tensor(state)).storage();
}

ActorCritic::ActorCritic(std::size_t state_dim, std::size_t hidden, std::size_t actions, Rng& init_rng)
    : state_dim_(state_dim), actions_(actions) {
  if (state_dim == 0 || hidden == 0 || actions == 0) throw ShapeMismatch("actor-critic dimensions must be positive");
  init_mlp(params_, "actor", state_dim, hidden, actions, init_rng);
  init_mlp(params_, "critic", state_dim, hidden, 1, init_rng);
  // Small final actor layer so the initial policy is near uniform.
  for (double& w : params_.value("actor3.weight").data()) w *= 0.01;
}

Var ActorCritic::logits(Tape& tape, Var states) {
  check_width(states.value(), state_dim_);
  return mlp(tape, params_, "actor", states);
}

Var ActorCritic::values(Tape& tape, Var states) {
  check_width(states.value(), state_dim_);
  return mlp(tape, params_, "critic", states);
}

Tensor ActorCritic::logits_rows(const Tensor& states) const {
  check_width(states, state_dim_);
  return mlp_rows(params_, "actor", states);
}

Tensor ActorCritic::values_rows(const Tensor& states) const {
  check_width(states, state_dim_);
  return mlp_rows(params_, "critic", states);
}

std::vector<double> ActorCritic::probabilities(std::span<const double> state) const {
  return ad::softmax(logits_rows(row_tensor(state)).data());
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeMismatch("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::size_t epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng) {
  const double u = rng.uniform();
  const std::size_t random_action = rng.uniform_int(q.size());
  return u < epsilon ? random_action : argmax(q);
}

std::size_t sample_categorical(std::span<const double> probabilities, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  return probabilities.size() - 1;
}

double epsilon_at(double start, double end, long decay_steps, long t) {
  if (decay_steps <= 0 || t >= decay_steps) return end;
  return start + (end - start) * static_cast<double>(t) / static_cast<double>(decay_steps);
}

std::vector<double> td_targets(const QNetwork& target, const Tensor& next_states, const std::vector<double>& rewards,
                               const std::vector<char>& done, double gamma) {
  if (rewards.size() != next_states.rows() || done.size() != next_states.rows()) {
    throw ShapeMismatch("td_targets: batch sizes differ");
  }
  const Tensor q = target.q_values(next_states);
  std::vector<double> y(rewards.size());
  for (std::size_t r = 0; r < y.size(); ++r) {
    const auto row = q.row(r);
    y[r] = rewards[r] + (done[r] ? 0.0 : gamma * *std::max_element(row.begin(), row.end()));
  }
  return y;
}

Var td_loss(Tape& tape, QNetwork& online, const Tensor& states, const std::vector<std::size_t>& actions,
            const std::vector<double>& targets) {
  if (actions.size() != states.rows() || targets.size() != states.rows()) throw ShapeMismatch("td_loss: batch sizes differ");
  for (std::size_t a : actions) {
    if (a >= online.actions()) throw IndexOutOfRange("action index out of range");
  }
  Var qa = ad::gather_cols(online.q(tape, tape.constant(states)), actions);
  Var y = tape.constant(Tensor({targets.size(), 1}, targets));
  return ad::mean(ad::square(ad::sub(qa, y)));
}

Var a2c_loss(Tape& tape, ActorCritic& net, const Tensor& states, const std::vector<std::size_t>& actions,
             const std::vector<double>& returns, const std::vector<double>& advantages,
             const A2cCoefficients& coefficients) {
  const std::size_t n = states.rows();
  if (actions.size() != n || returns.size() != n || advantages.size() != n) throw ShapeMismatch("a2c_loss: batch sizes differ");
  Var s = tape.constant(states);
  Var logits = net.logits(tape, s);
  // -log pi(a|s) is the per-row cross-entropy against the taken action.
  Var nll = ad::softmax_cross_entropy_rows(logits, actions);
  Var policy = ad::mean(ad::mul(nll, tape.constant(Tensor({n, 1}, advantages))));
  Var value = ad::mean(ad::square(ad::sub(net.values(tape, s), tape.constant(Tensor({n, 1}, returns)))));
  Var entropy = ad::mean(ad::entropy_rows(logits));
  return ad::add(ad::add(policy, ad::scale(value, coefficients.value)), ad::scale(entropy, -coefficients.entropy));
}

}  // namespace mem::agents
