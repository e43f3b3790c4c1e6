#include "mem/encoder/networks.hpp"

#include <cmath>
#include <string>

#include "mem/ad/layers.hpp"
#include "mem/errors.hpp"

namespace mem::encoder {

using ad::Tape;
using ad::Tensor;
using ad::Var;

EncoderNet::EncoderNet(const EncoderConfig& config, Rng& init_rng) : config_(config) {
  if (config.input_dim == 0 || config.hidden == 0 || config.feature_dim == 0) {
    throw ShapeMismatch("encoder dimensions must be positive");
  }
  ad::init_linear(params_, "trunk", config.input_dim, config.hidden, init_rng, std::sqrt(2.0));
  ad::init_linear(params_, "shared_head", config.hidden, config.feature_dim, init_rng);
  ad::init_linear(params_, "specific_head", config.hidden, config.feature_dim, init_rng);
}

EncoderNet::Features EncoderNet::forward(Tape& tape, Var obs) {
  if (obs.cols() != config_.input_dim) {
    throw ShapeMismatch("encoder expects input_dim " + std::to_string(config_.input_dim) + ", got " +
                        std::to_string(obs.cols()));
  }
  Var h = ad::relu(ad::linear(tape, params_, "trunk", obs));
  return {ad::layer_norm_rows(ad::linear(tape, params_, "shared_head", h)),
          ad::layer_norm_rows(ad::linear(tape, params_, "specific_head", h))};
}

std::pair<Tensor, Tensor> EncoderNet::encode_rows(const Tensor& obs) const {
  if (obs.cols() != config_.input_dim) {
    throw ShapeMismatch("encoder expects input_dim " + std::to_string(config_.input_dim) + ", got " +
                        std::to_string(obs.cols()));
  }
  Tensor h = ad::linear_forward(params_, "trunk", obs);
  ad::relu_inplace(h);
  Tensor x = ad::linear_forward(params_, "shared_head", h);
  Tensor y = ad::linear_forward(params_, "specific_head", h);
  ad::layer_norm_rows_inplace(x);
  ad::layer_norm_rows_inplace(y);
  return {std::move(x), std::move(y)};
}

std::pair<std::vector<double>, std::vector<double>> EncoderNet::encode(std::span<const double> obs) const {
  auto [x, y] = encode_rows(Tensor({1, obs.size()}, std::vector<double>(obs.begin(), obs.end())));
  return {x.storage(), y.storage()};
}

DiscriminatorNet::DiscriminatorNet(std::size_t feature_dim, std::size_t hidden, std::size_t views, Rng& init_rng)
    : views_(views) {
  if (feature_dim == 0 || hidden == 0 || views == 0) throw ShapeMismatch("discriminator dimensions must be positive");
  ad::init_linear(params_, "hidden", feature_dim, hidden, init_rng, std::sqrt(2.0));
  ad::init_linear(params_, "out", hidden, views, init_rng);
}

Var DiscriminatorNet::logits(Tape& tape, Var shared, bool trainable) {
  auto layer = [&](const std::string& name, Var x) {
    if (trainable) return ad::linear(tape, params_, name, x);
    return ad::add_row(ad::matmul(x, tape.constant(params_.value(name + ".weight"))),
                       tape.constant(params_.value(name + ".bias")));
  };
  return layer("out", ad::relu(layer("hidden", shared)));
}

Tensor DiscriminatorNet::logits_rows(const Tensor& shared) const {
  Tensor h = ad::linear_forward(params_, "hidden", shared);
  ad::relu_inplace(h);
  return ad::linear_forward(params_, "out", h);
}

std::vector<double> DiscriminatorNet::probabilities(std::span<const double> shared) const {
  const Tensor z = logits_rows(Tensor({1, shared.size()}, std::vector<double>(shared.begin(), shared.end())));
  return ad::softmax(z.data());
}

FeatureBundle make_bundle(std::vector<std::vector<double>> shared, std::vector<std::vector<double>> specific) {
  if (shared.empty() || shared.size() != specific.size()) {
    throw ShapeMismatch("bundle needs the same nonzero number of shared and specific vectors");
  }
  const std::size_t p = shared.front().size();
  std::vector<double> mean(p, 0.0);
  for (std::size_t i = 0; i < shared.size(); ++i) {
    if (shared[i].size() != p || specific[i].size() != p) throw ShapeMismatch("bundle feature sizes differ");
    for (std::size_t c = 0; c < p; ++c) mean[c] += shared[i][c];
  }
  for (double& m : mean) m /= static_cast<double>(shared.size());
  return {std::move(shared), std::move(specific), std::move(mean)};
}

FeatureBundle encode_views(const EncoderNet& net, const envs::MultiViewObs& obs) {
  auto [x, y] = net.encode_rows(stack_views({&obs}, nullptr));
  std::vector<std::vector<double>> shared, specific;
  for (std::size_t i = 0; i < obs.view_count(); ++i) {
    shared.emplace_back(x.row(i).begin(), x.row(i).end());
    specific.emplace_back(y.row(i).begin(), y.row(i).end());
  }
  return make_bundle(std::move(shared), std::move(specific));
}

std::vector<double> assemble_state(const FeatureBundle& bundle) {
  std::vector<double> state;
  state.reserve((bundle.specific.size() + 1) * bundle.shared_mean.size());
  for (const auto& y : bundle.specific) state.insert(state.end(), y.begin(), y.end());
  state.insert(state.end(), bundle.shared_mean.begin(), bundle.shared_mean.end());
  return state;
}

Tensor stack_views(const std::vector<const envs::MultiViewObs*>& batch, std::vector<std::size_t>* labels) {
  if (batch.empty()) throw ShapeMismatch("empty observation batch");
  const std::size_t views = batch.front()->view_count();
  const std::size_t dim = batch.front()->input_dim();
  Tensor rows = Tensor::matrix(batch.size() * views, dim);
  if (labels) labels->clear();
  std::size_t r = 0;
  for (const envs::MultiViewObs* obs : batch) {
    if (obs->view_count() != views) throw ShapeMismatch("observations disagree on the number of views");
    for (std::size_t v = 0; v < views; ++v, ++r) {
      if (obs->views[v].size() != dim) throw ShapeMismatch("views disagree on input_dim");
      std::copy(obs->views[v].begin(), obs->views[v].end(), rows.row(r).begin());
      if (labels) labels->push_back(v);
    }
  }
  return rows;
}

}  // namespace mem::encoder
