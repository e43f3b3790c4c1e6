#include "mem/encoder/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mem/errors.hpp"

namespace mem::encoder {

ProbeResult linear_probe(const ad::Tensor& features, const std::vector<std::size_t>& labels, std::size_t classes,
                         Rng& rng, const ProbeOptions& options) {
  const std::size_t n = features.rows(), d = features.cols();
  if (labels.size() != n) throw ShapeMismatch("probe: label count differs from feature rows");
  if (classes < 2) throw ShapeMismatch("probe needs at least two classes");
  for (std::size_t l : labels) {
    if (l >= classes) throw IndexOutOfRange("probe label outside class range");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
  const auto n_test = static_cast<std::size_t>(std::round(options.test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) throw NotEnoughData("probe split leaves an empty side");
  const std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  const std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());

  std::vector<double> mu(d, 0.0), sd(d, 0.0);
  for (std::size_t r : train) {
    for (std::size_t c = 0; c < d; ++c) mu[c] += features.at(r, c);
  }
  for (double& m : mu) m /= static_cast<double>(train.size());
  for (std::size_t r : train) {
    for (std::size_t c = 0; c < d; ++c) sd[c] += std::pow(features.at(r, c) - mu[c], 2);
  }
  for (double& s : sd) s = std::sqrt(s / static_cast<double>(train.size()));
  auto z = [&](std::size_t r, std::size_t c) { return sd[c] > 1e-12 ? (features.at(r, c) - mu[c]) / sd[c] : 0.0; };

  std::vector<double> w(d * classes, 0.0), b(classes, 0.0);
  std::vector<double> logits(classes);
  auto predict = [&](std::size_t r) {
    for (std::size_t k = 0; k < classes; ++k) {
      double s = b[k];
      for (std::size_t c = 0; c < d; ++c) s += z(r, c) * w[c * classes + k];
      logits[k] = s;
    }
    return ad::softmax(logits);
  };

  const double inv = 1.0 / static_cast<double>(train.size());
  for (int it = 0; it < options.iterations; ++it) {
    std::vector<double> gw(d * classes, 0.0), gb(classes, 0.0);
    for (std::size_t r : train) {
      auto p = predict(r);
      p[labels[r]] -= 1.0;
      for (std::size_t k = 0; k < classes; ++k) {
        gb[k] += p[k] * inv;
        for (std::size_t c = 0; c < d; ++c) gw[c * classes + k] += z(r, c) * p[k] * inv;
      }
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= options.learning_rate * (gw[i] + options.l2 * w[i]);
    for (std::size_t k = 0; k < classes; ++k) b[k] -= options.learning_rate * gb[k];
  }

  auto accuracy = [&](const std::vector<std::size_t>& idx) {
    std::size_t hits = 0;
    for (std::size_t r : idx) {
      const auto p = predict(r);
      if (static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()) == labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(idx.size());
  };
  return {accuracy(train), accuracy(test)};
}

std::vector<std::vector<double>> draw_view_offsets(const OffsetViewsSpec& spec, Rng& rng) {
  std::vector<std::vector<double>> offsets(spec.views, std::vector<double>(spec.latent_dim));
  for (auto& o : offsets) {
    for (double& v : o) v = spec.offset_scale * rng.normal();
  }
  return offsets;
}

std::vector<envs::MultiViewObs> sample_offset_views(const std::vector<std::vector<double>>& offsets,
                                                    std::size_t count, Rng& rng) {
  if (offsets.empty()) throw ShapeMismatch("no view offsets");
  const std::size_t dim = offsets.front().size();
  std::vector<envs::MultiViewObs> out;
  out.reserve(count);
  std::vector<double> latent(dim);
  for (std::size_t s = 0; s < count; ++s) {
    for (double& v : latent) v = rng.normal();
    envs::MultiViewObs obs;
    for (const auto& off : offsets) {
      std::vector<double> view(dim);
      for (std::size_t c = 0; c < dim; ++c) view[c] = latent[c] + off[c];
      obs.views.push_back(std::move(view));
    }
    out.push_back(std::move(obs));
  }
  return out;
}

}  // namespace mem::encoder
