#include "mem/encoder/trainer.hpp"

#include <algorithm>
#include <set>

#include "mem/errors.hpp"

namespace mem::encoder {

using ad::Tape;
using ad::Tensor;
using ad::Var;

EncoderTrainer::EncoderTrainer(EncoderNet& encoder, DiscriminatorNet& disc, TrainerConfig config)
    : encoder_(encoder),
      disc_(disc),
      config_(config),
      encoder_opt_(ad::AdamConfig{.learning_rate = config.encoder_learning_rate}),
      disc_opt_(ad::AdamConfig{.learning_rate = config.discriminator_learning_rate}) {
  config_.weights.validate();
}

StepLosses EncoderTrainer::step(const std::vector<const envs::MultiViewObs*>& batch) {
  std::vector<std::size_t> labels;
  Tensor rows = stack_views(batch, &labels);
  return step(rows, labels);
}

StepLosses EncoderTrainer::step(const Tensor& rows, const std::vector<std::size_t>& labels) {
  if (rows.rows() == 0) throw ShapeMismatch("empty encoder batch");
  const std::size_t views = std::set<std::size_t>(labels.begin(), labels.end()).size();
  StepLosses out;

  Tape tape;
  auto f = encoder_.forward(tape, tape.constant(rows));

  // Discriminator on detached shared features.
  {
    const Tensor& shared = f.shared.value();
    Tape disc_tape;
    Var loss = loss_adv_discriminator(disc_tape, disc_, shared, labels);
    out.l_adv_d = loss.value().item();
    const Tensor z = disc_.logits_rows(shared);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      if (static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) == labels[r]) ++hits;
    }
    out.disc_accuracy = static_cast<double>(hits) / static_cast<double>(z.rows());
    disc_.params().zero_grad();
    disc_tape.backward(loss);
    disc_opt_.step(disc_.params());
  }

  const LossWeights& w = config_.weights;
  Var l_diff = loss_diff(f.shared, f.specific);
  Var l_adv = loss_adv_encoder(tape, disc_, f.shared, labels);
  Var total = ad::add(ad::scale(l_diff, w.lambda1), ad::scale(l_adv, w.lambda3));
  out.l_diff = l_diff.value().item();
  out.l_adv_g = l_adv.value().item();
  if (views >= 2) {
    Var l_con = loss_con(f.specific, labels, w.margin);
    out.l_con = l_con.value().item();
    total = ad::add(total, ad::scale(l_con, w.lambda2));
  }
  out.l_total = total.value().item();
  encoder_.params().zero_grad();
  tape.backward(total);
  encoder_opt_.step(encoder_.params());
  return out;
}

StepLosses encoder_train_step(EncoderNet& encoder, DiscriminatorNet& disc,
                              const std::vector<const envs::MultiViewObs*>& batch, const LossWeights& weights,
                              double learning_rate) {
  EncoderTrainer trainer(encoder, disc, {weights, learning_rate, learning_rate});
  return trainer.step(batch);
}

}  // namespace mem::encoder
