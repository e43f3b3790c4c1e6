#pragma once

#include <span>
#include <vector>

#include "mem/ad/tape.hpp"
#include "mem/encoder/networks.hpp"

namespace mem::encoder {

struct LossWeights {
  double lambda1 = 0.1;   // L_diff
  double lambda2 = 0.02;  // L_con
  double lambda3 = 0.01;  // L_adv
  double margin = 1.0;

  void validate() const;
};

// ---- Plain-value forms -----------------------------------------------------

/// max{cos(x, y), 0} + |x|_1 + |y|_1. A zero vector contributes no cosine term.
double loss_diff(std::span<const double> x, std::span<const double> y);

/// Contrastive loss over N view groups (each a list of specific vectors):
/// 1/(2M') sum_j [ |y_j - mu_same|^2 + max(margin - |y_j - mu_diff|, 0)^2 ],
/// where mu_same is the mean of the anchor's own group (anchor included),
/// mu_diff the mean of all other groups pooled, and M' the total anchor count.
/// Throws EmptyGroup if a group is empty or there is only one group.
double loss_con(const std::vector<std::vector<std::vector<double>>>& specific_by_view, double margin);

/// Mean cross-entropy of the discriminator against the true view labels.
double loss_adv_discriminator(const DiscriminatorNet& disc, const ad::Tensor& shared,
                              const std::vector<std::size_t>& labels);

/// Mean cross-entropy of the discriminator output against the uniform
/// distribution over views. Labels are only validated.
double loss_adv_encoder(const DiscriminatorNet& disc, const ad::Tensor& shared,
                        const std::vector<std::size_t>& labels);

double loss_total(const LossWeights& w, double l_diff, double l_con, double l_adv);

// ---- Tape forms, batch means over rows ---------------------------------------

ad::Var loss_diff(ad::Var shared, ad::Var specific);
ad::Var loss_con(ad::Var specific, const std::vector<std::size_t>& labels, double margin);
/// `shared` enters as a constant, so only the discriminator gets gradients.
ad::Var loss_adv_discriminator(ad::Tape& tape, DiscriminatorNet& disc, const ad::Tensor& shared,
                               const std::vector<std::size_t>& labels);
/// Discriminator parameters enter as constants, so only the encoder gets gradients.
ad::Var loss_adv_encoder(ad::Tape& tape, DiscriminatorNet& disc, ad::Var shared,
                         const std::vector<std::size_t>& labels);
ad::Var loss_total(const LossWeights& w, ad::Var l_diff, ad::Var l_con, ad::Var l_adv);

}  // namespace mem::encoder
