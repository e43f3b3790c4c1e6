#include "mem/harness/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>

#include "mem/ad/gradcheck.hpp"
#include "mem/agents/policies.hpp"
#include "mem/encoder/losses.hpp"
#include "mem/encoder/networks.hpp"
#include "mem/errors.hpp"
#include "mem/exploration/entropy.hpp"
#include "mem/rng.hpp"

namespace mem::harness {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void jitter_biases(ad::ParamStore& ps, Rng& rng) {
  for (const auto& n : ps.names()) {
    if (n.ends_with(".bias")) {
      for (double& b : ps.value(n).data()) b = 0.3 * rng.normal();
    }
  }
}

}  // namespace

BenchDistribution bench_distribution_from_string(const std::string& s) {
  if (s == "uniform") return BenchDistribution::uniform;
  if (s == "gaussian") return BenchDistribution::gaussian;
  throw ConfigInvalid("unknown distribution '" + s + "'");
}

EntropyBenchReport entropy_bench(const EntropyBenchOptions& o) {
  const auto start = Clock::now();
  EntropyBenchReport r;
  r.analytic = o.distribution == BenchDistribution::gaussian
                   ? 0.5 * static_cast<double>(o.q) * std::log(2.0 * std::numbers::pi * std::numbers::e)
                   : 0.0;
  Rng rng(o.seed);
  for (int t = 0; t < o.trials; ++t) {
    std::vector<double> coords(o.n * o.q);
    for (double& c : coords) c = o.distribution == BenchDistribution::gaussian ? rng.normal() : rng.uniform();
    const exploration::PointSet pts(o.n, o.q, std::move(coords));
    auto t0 = Clock::now();
    const double h = exploration::estimate_entropy(pts, o.k, exploration::KnnMethod::tree);
    r.tree_seconds += since(t0);
    if (o.time_brute) {
      t0 = Clock::now();
      exploration::knn_distances_batch(pts, o.k, exploration::KnnMethod::brute);
      r.brute_seconds += since(t0);
    }
    r.estimates.push_back(h);
    r.mean_abs_error += std::abs(h - r.analytic) / o.trials;
  }
  r.total_seconds = since(start);
  return r;
}

std::vector<GradientCase> gradient_suite(int trials, std::uint64_t seed) {
  std::vector<GradientCase> cases;
  auto record = [&](const std::string& name, const ad::GradCheckResult& g) {
    auto it = std::find_if(cases.begin(), cases.end(), [&](const GradientCase& c) { return c.name == name; });
    if (it == cases.end()) {
      cases.push_back({name});
      it = cases.end() - 1;
    }
    if (g.max_rel_error >= it->max_rel_error) {
      it->max_rel_error = g.max_rel_error;
      it->worst = g.worst;
    }
    it->checked += g.checked;
    it->skipped += g.skipped;
  };

  using ad::Tape;
  using ad::Var;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(mix64(seed + static_cast<std::uint64_t>(trial)));
    const std::size_t views = 2 + trial % 2, dim = 3 + trial % 3, hidden = 4, p = 3;
    encoder::EncoderNet enc({dim, hidden, p}, rng);
    encoder::DiscriminatorNet disc(p, hidden, views, rng);
    jitter_biases(enc.params(), rng);
    jitter_biases(disc.params(), rng);
    std::vector<envs::MultiViewObs> batch(2);
    for (auto& o : batch) {
      for (std::size_t v = 0; v < views; ++v) {
        std::vector<double> x(dim);
        for (double& e : x) e = rng.normal();
        o.views.push_back(x);
      }
    }
    std::vector<std::size_t> labels;
    const ad::Tensor rows = encoder::stack_views({&batch[0], &batch[1]}, &labels);
    const encoder::LossWeights w{0.7, 0.4, 0.9, 1.5};
    record("loss_diff", ad::check_gradients({&enc.params()}, [&](Tape& t) {
             auto f = enc.forward(t, t.constant(rows));
             return encoder::loss_diff(f.shared, f.specific);
           }));
    record("loss_con", ad::check_gradients({&enc.params()}, [&](Tape& t) {
             return encoder::loss_con(enc.forward(t, t.constant(rows)).specific, labels, w.margin);
           }));
    const ad::Tensor shared = enc.encode_rows(rows).first;
    record("loss_adv_discriminator", ad::check_gradients({&disc.params()}, [&](Tape& t) {
             return encoder::loss_adv_discriminator(t, disc, shared, labels);
           }));
    record("loss_adv_encoder", ad::check_gradients({&enc.params()}, [&](Tape& t) {
             return encoder::loss_adv_encoder(t, disc, enc.forward(t, t.constant(rows)).shared, labels);
           }));
    record("loss_total", ad::check_gradients({&enc.params()}, [&](Tape& t) {
             auto f = enc.forward(t, t.constant(rows));
             return encoder::loss_total(w, encoder::loss_diff(f.shared, f.specific),
                                        encoder::loss_con(f.specific, labels, w.margin),
                                        encoder::loss_adv_encoder(t, disc, f.shared, labels));
           }));

    const std::size_t d = 3 + trial % 3, n = 4;
    agents::QNetwork q(d, 5, 4, rng);
    agents::ActorCritic ac(d, 5, 4, rng);
    jitter_biases(q.params(), rng);
    jitter_biases(ac.params(), rng);
    for (double& x : ac.params().value("actor3.weight").data()) x = rng.normal();
    ad::Tensor states = ad::Tensor::matrix(n, d);
    for (double& x : states.data()) x = rng.normal();
    std::vector<std::size_t> actions(n);
    std::vector<double> targets(n), returns(n), adv(n);
    for (std::size_t i = 0; i < n; ++i) {
      actions[i] = rng.uniform_int(4);
      targets[i] = rng.normal();
      returns[i] = rng.normal();
      adv[i] = rng.normal();
    }
    record("td_loss", ad::check_gradients({&q.params()},
                                          [&](Tape& t) { return agents::td_loss(t, q, states, actions, targets); }));
    record("a2c_loss", ad::check_gradients({&ac.params()}, [&](Tape& t) {
             return agents::a2c_loss(t, ac, states, actions, returns, adv, {0.5, 0.05});
           }));
  }
  return cases;
}

}  // namespace mem::harness
