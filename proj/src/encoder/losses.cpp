#include "mem/encoder/losses.hpp"

#include <cmath>
#include <string>

#include "mem/errors.hpp"

namespace mem::encoder {

using ad::Tape;
using ad::Tensor;
using ad::Var;

void LossWeights::validate() const {
  for (double v : {lambda1, lambda2, lambda3, margin}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigInvalid("loss weights and margin must be finite and >= 0");
  }
}

namespace {

double norm1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_labels(const std::vector<std::size_t>& labels, std::size_t rows, std::size_t views) {
  if (labels.size() != rows) throw ShapeMismatch("label count differs from batch rows");
  for (std::size_t l : labels) {
    if (l >= views) throw IndexOutOfRange("view label " + std::to_string(l) + " outside [0, " + std::to_string(views) + ")");
  }
}

}  // namespace

double loss_diff(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeMismatch("loss_diff: feature sizes differ");
  double cos = 0.0;
  const double nx = norm2(x), ny = norm2(y);
  if (nx >= 1e-12 && ny >= 1e-12) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    cos = dot / (nx * ny);
  }
  return std::max(cos, 0.0) + norm1(x) + norm1(y);
}

double loss_con(const std::vector<std::vector<std::vector<double>>>& specific_by_view, double margin) {
  if (specific_by_view.size() < 2) throw EmptyGroup("contrastive loss needs at least two view groups");
  std::size_t p = 0;
  for (const auto& g : specific_by_view) {
    if (g.empty()) throw EmptyGroup("empty view group");
    p = g.front().size();
  }
  const std::size_t views = specific_by_view.size();
  std::vector<std::vector<double>> sums(views, std::vector<double>(p, 0.0));
  std::vector<double> total(p, 0.0);
  std::size_t anchors = 0;
  for (std::size_t v = 0; v < views; ++v) {
    for (const auto& y : specific_by_view[v]) {
      if (y.size() != p) throw ShapeMismatch("contrastive loss: feature sizes differ");
      for (std::size_t c = 0; c < p; ++c) {
        sums[v][c] += y[c];
        total[c] += y[c];
      }
      ++anchors;
    }
  }
  double acc = 0.0;
  for (std::size_t v = 0; v < views; ++v) {
    const double same_n = static_cast<double>(specific_by_view[v].size());
    const double diff_n = static_cast<double>(anchors) - same_n;
    for (const auto& y : specific_by_view[v]) {
      double pull = 0.0, push = 0.0;
      for (std::size_t c = 0; c < p; ++c) {
        const double ds = y[c] - sums[v][c] / same_n;
        const double dd = y[c] - (total[c] - sums[v][c]) / diff_n;
        pull += ds * ds;
        push += dd * dd;
      }
      const double hinge = std::max(margin - std::sqrt(push), 0.0);
      acc += pull + hinge * hinge;
    }
  }
  return acc / (2.0 * static_cast<double>(anchors));
}

double loss_adv_discriminator(const DiscriminatorNet& disc, const Tensor& shared,
                              const std::vector<std::size_t>& labels) {
  check_labels(labels, shared.rows(), disc.views());
  const Tensor z = disc.logits_rows(shared);
  double s = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) s += ad::softmax_cross_entropy(z.row(r), labels[r]);
  return s / static_cast<double>(z.rows());
}

double loss_adv_encoder(const DiscriminatorNet& disc, const Tensor& shared, const std::vector<std::size_t>& labels) {
  check_labels(labels, shared.rows(), disc.views());
  const Tensor z = disc.logits_rows(shared);
  double s = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto p = ad::softmax(z.row(r));
    for (double q : p) s -= std::log(q) / static_cast<double>(p.size());
  }
  return s / static_cast<double>(z.rows());
}

double loss_total(const LossWeights& w, double l_diff, double l_con, double l_adv) {
  return w.lambda1 * l_diff + w.lambda2 * l_con + w.lambda3 * l_adv;
}

Var loss_diff(Var shared, Var specific) {
  return ad::mean(ad::add(ad::relu(ad::cosine_rows(shared, specific)),
                          ad::add(ad::l1_rows(shared), ad::l1_rows(specific))));
}

Var loss_con(Var specific, const std::vector<std::size_t>& labels, double margin) {
  if (labels.size() != specific.rows()) throw ShapeMismatch("label count differs from batch rows");
  Var same = ad::group_centroids(specific, labels, false);
  Var diff = ad::group_centroids(specific, labels, true);
  Var pull = ad::sum_rows(ad::square(ad::sub(specific, same)));
  Var hinge = ad::relu(ad::add_scalar(ad::scale(ad::l2norm_rows(ad::sub(specific, diff)), -1.0), margin));
  return ad::scale(ad::mean(ad::add(pull, ad::square(hinge))), 0.5);
}

Var loss_adv_discriminator(Tape& tape, DiscriminatorNet& disc, const Tensor& shared,
                           const std::vector<std::size_t>& labels) {
  check_labels(labels, shared.rows(), disc.views());
  return ad::mean(ad::softmax_cross_entropy_rows(disc.logits(tape, tape.constant(shared), true), labels));
}

Var loss_adv_encoder(Tape& tape, DiscriminatorNet& disc, Var shared, const std::vector<std::size_t>& labels) {
  check_labels(labels, shared.rows(), disc.views());
  return ad::mean(ad::uniform_cross_entropy_rows(disc.logits(tape, shared, false)));
}

Var loss_total(const LossWeights& w, Var l_diff, Var l_con, Var l_adv) {
  return ad::add(ad::add(ad::scale(l_diff, w.lambda1), ad::scale(l_con, w.lambda2)), ad::scale(l_adv, w.lambda3));
}

}  // namespace mem::encoder
