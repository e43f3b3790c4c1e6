#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mem/errors.hpp"
#include "mem/exploration/entropy.hpp"
#include "mem/exploration/intrinsic.hpp"
#include "mem/exploration/knn.hpp"
#include "mem/rng.hpp"

using namespace mem;
using namespace mem::exploration;

namespace {

// Independent oracle: every pairwise distance, sorted, k-th picked.
std::vector<double> pairwise_kth(const std::vector<std::vector<double>>& pts, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < pts[i].size(); ++c) s += (pts[i][c] - pts[j][c]) * (pts[i][c] - pts[j][c]);
      d.push_back(std::sqrt(s));
    }
    std::sort(d.begin(), d.end());
    out.push_back(d[k - 1]);
  }
  return out;
}

PointSet uniform_points(std::size_t n, std::size_t q, Rng& rng) {
  std::vector<double> c(n * q);
  for (double& x : c) x = rng.uniform();
  return PointSet(n, q, std::move(c));
}

const PointSet kFixture = PointSet::from_scalars({0, 1, 3});

}  // namespace

TEST(KnnDistance, FixtureMatchesPairwiseOracle) {
  const std::vector<std::vector<double>> raw = {{0}, {1}, {3}};
  EXPECT_EQ(pairwise_kth(raw, 1), (std::vector<double>{1, 1, 2}));
  EXPECT_EQ(pairwise_kth(raw, 2), (std::vector<double>{3, 2, 3}));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(knn_distance(kFixture, i, 1), pairwise_kth(raw, 1)[i]);
    EXPECT_EQ(knn_distance(kFixture, i, 2), pairwise_kth(raw, 2)[i]);
  }
}

TEST(KnnDistance, IdenticalPointsGiveZero) {
  const PointSet same = PointSet::from_rows({{2, 2}, {2, 2}, {2, 2}, {2, 2}});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(knn_distance(same, i, 3), 0.0);
  EXPECT_EQ(knn_distances_batch(same, 2, KnnMethod::tree), std::vector<double>(4, 0.0));
}

TEST(KnnDistance, Errors) {
  EXPECT_THROW(knn_distance(kFixture, 0, 3), KTooLarge);
  EXPECT_THROW(knn_distances_batch(kFixture, 3, KnnMethod::tree), KTooLarge);
  EXPECT_THROW(knn_distance(kFixture, 3, 1), IndexOutOfRange);
}

TEST(KnnDistance, TiesBrokenByLowerIndex) {
  const PointSet pts = PointSet::from_scalars({0, -1, 1, 2, -2});
  const auto nb = knn_brute(pts, 0, 2);
  EXPECT_EQ(nb[0].index, 1u);
  EXPECT_EQ(nb[1].index, 2u);
  const KdTree tree(pts, 1);
  const auto tb = tree.nearest(0, 2);
  EXPECT_EQ(tb[0].index, 1u);
  EXPECT_EQ(tb[1].index, 2u);
}

TEST(KnnBatch, TwoPoints) {
  const PointSet pts = PointSet::from_rows({{0, 0}, {3, 4}});
  for (auto m : {KnnMethod::brute, KnnMethod::tree}) EXPECT_EQ(knn_distances_batch(pts, 1, m), (std::vector<double>{5, 5}));
}

TEST(KnnBatch, TreeEqualsBruteOnRandom8D) {
  Rng rng(2024);
  const PointSet pts = uniform_points(1000, 8, rng);
  for (std::size_t k : {1, 3, 5}) {
    EXPECT_EQ(knn_distances_batch(pts, k, KnnMethod::tree), knn_distances_batch(pts, k, KnnMethod::brute));
  }
}

TEST(KnnBatch, TreeNeighboursEqualBruteIncludingIndices) {
  Rng rng(5);
  // Coarse lattice coordinates force many exact distance ties.
  std::vector<double> c(400 * 2);
  for (double& x : c) x = static_cast<double>(rng.uniform_int(6));
  const PointSet pts(400, 2, std::move(c));
  const KdTree tree(pts, 4);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto a = tree.nearest(i, 5);
    const auto b = knn_brute(pts, i, 5);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      EXPECT_EQ(a[j].index, b[j].index);
      EXPECT_EQ(a[j].distance, b[j].distance);
    }
  }
}

TEST(KnnBatch, PermutationEquivariance) {
  Rng rng(11);
  const PointSet pts = uniform_points(60, 3, rng);
  std::vector<std::size_t> order(60);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
  const auto base = knn_distances_batch(pts, 3);
  const auto perm = knn_distances_batch(pts.permuted(order), 3, KnnMethod::tree);
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(perm[i], base[order[i]]);
}

TEST(SpecialFunctions, ReferenceValues) {
  EXPECT_NEAR(gamma_fn(1.5), std::sqrt(std::numbers::pi) / 2.0, 1e-9);
  EXPECT_NEAR(digamma_fn(1.0), -0.5772156649, 1e-9);
  EXPECT_NEAR(std::exp(log_gamma_fn(5.0)), 24.0, 1e-9);
}

TEST(SpecialFunctions, DigammaMatchesBoost) {
  for (double x = 0.05; x < 60.0; x *= 1.13) {
    EXPECT_NEAR(digamma_fn(x), boost::math::digamma(x), 1e-9 * std::max(1.0, std::abs(boost::math::digamma(x)))) << x;
  }
}

TEST(EntropyEstimate, HandFixture) {
  // Per-point terms reduce to log(6 d_i) for n = 3, q = 1, k = 1.
  const double hand = (std::log(6.0) + std::log(6.0) + std::log(12.0)) / 3.0 + 0.5772156649015329;
  EXPECT_NEAR(hand, 2.6000, 1e-3);
  EXPECT_NEAR(estimate_entropy(kFixture, 1), hand, 1e-12);
  EXPECT_NEAR(estimate_entropy(kFixture, 1), 2.6000, 1e-3);
}

TEST(EntropyEstimate, DegenerateSample) {
  EXPECT_THROW(estimate_entropy(PointSet::from_scalars({1, 1, 1}), 1), DegenerateSample);
  EXPECT_THROW(simplified_entropy_score(PointSet::from_scalars({1, 1, 1}), 1), DegenerateSample);
}

TEST(EntropyEstimate, StandardGaussianMonteCarlo) {
  const double truth = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  double sum = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    std::vector<double> xs(4096);
    for (double& x : xs) x = rng.normal();
    sum += estimate_entropy(PointSet::from_scalars(xs), 3, KnnMethod::tree);
  }
  EXPECT_NEAR(sum / 10.0, truth, 0.1);
}

TEST(EntropyEstimate, UniformConsistency) {
  double abs_err = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(200 + seed);
    abs_err += std::abs(estimate_entropy(uniform_points(4096, 1, rng), 3, KnnMethod::tree));
  }
  EXPECT_LT(abs_err / 10.0, 0.1);
}

TEST(SimplifiedScore, Examples) {
  EXPECT_NEAR(simplified_entropy_score(kFixture, 1), std::log(2.0) / 3.0, 1e-12);
  EXPECT_NEAR(simplified_entropy_score(kFixture, 1), 0.2310, 1e-4);
  EXPECT_NEAR(simplified_entropy_score(PointSet::from_scalars({0, std::numbers::e}), 1), 1.0, 1e-15);
}

TEST(SimplifiedScore, RanksLikeFullEstimatorTerms) {
  Rng rng(8);
  const PointSet pts = uniform_points(200, 3, rng);
  const auto a = simplified_entropy_terms(pts, 3);
  const auto b = entropy_terms(pts, 3);
  std::vector<std::size_t> ia(a.size()), ib(b.size());
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  std::stable_sort(ia.begin(), ia.end(), [&](auto x, auto y) { return a[x] < a[y]; });
  std::stable_sort(ib.begin(), ib.end(), [&](auto x, auto y) { return b[x] < b[y]; });
  EXPECT_EQ(ia, ib);
}

TEST(MultiviewReward, IdenticalFeaturesGiveZero) {
  const PointSet same = PointSet::from_rows({{1, 2}, {1, 2}, {1, 2}, {1, 2}});
  for (double r : multiview_intrinsic_rewards({same, same}, same, 2)) EXPECT_EQ(r, 0.0);
}

TEST(MultiviewReward, HandFixtures) {
  const PointSet zeros = PointSet::from_scalars({0, 0, 0});
  const auto one = multiview_intrinsic_rewards({kFixture}, zeros, 1);
  EXPECT_NEAR(one[0], 0.5 * std::log(2.0), 1e-12);
  EXPECT_NEAR(one[1], 0.5 * std::log(2.0), 1e-12);
  EXPECT_NEAR(one[2], 0.5 * std::log(3.0), 1e-12);
  EXPECT_NEAR(one[0], 0.3466, 1e-4);
  EXPECT_NEAR(one[2], 0.5493, 1e-4);

  const auto two = multiview_intrinsic_rewards({kFixture, kFixture}, zeros, 1);
  EXPECT_NEAR(two[0], 2.0 / 3.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(two[1], 2.0 / 3.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(two[2], 2.0 / 3.0 * std::log(3.0), 1e-12);
}

TEST(MultiviewReward, Errors) {
  EXPECT_THROW(multiview_intrinsic_rewards({kFixture}, PointSet::from_scalars({0, 0}), 1), StreamLengthMismatch);
  EXPECT_THROW(multiview_intrinsic_rewards({kFixture}, PointSet::from_scalars({0, 0, 0}), 3), KTooLarge);
}

class MultiviewRewardProperty : public ::testing::TestWithParam<int> {};

TEST_P(MultiviewRewardProperty, NonnegativePermutationAndScaling) {
  Rng rng(300 + GetParam());
  const std::size_t views = 1 + rng.uniform_int(3), steps = 5 + rng.uniform_int(40), dim = 1 + rng.uniform_int(4);
  const std::size_t k = 1 + rng.uniform_int(std::min<std::size_t>(steps - 1, 5));
  std::vector<PointSet> specific;
  for (std::size_t i = 0; i < views; ++i) {
    std::vector<double> c(steps * dim);
    // Snap a share of the coordinates to a grid so zero distances occur.
    for (double& x : c) x = rng.bernoulli(0.3) ? std::round(rng.uniform(0, 2)) : rng.normal();
    specific.emplace_back(steps, dim, std::move(c));
  }
  const PointSet shared = uniform_points(steps, dim, rng);
  const auto r = multiview_intrinsic_rewards(specific, shared, k);
  for (double x : r) EXPECT_GE(x, 0.0);

  std::vector<std::size_t> order(steps);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = steps - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
  std::vector<PointSet> ps;
  for (const auto& s : specific) ps.push_back(s.permuted(order));
  const auto rp = multiview_intrinsic_rewards(ps, shared.permuted(order), k);
  for (std::size_t t = 0; t < steps; ++t) EXPECT_EQ(rp[t], r[order[t]]);

  std::vector<PointSet> scaled;
  for (const auto& s : specific) scaled.push_back(s.scaled(1.7));
  const auto rs = multiview_intrinsic_rewards(scaled, shared.scaled(1.7), k);
  for (std::size_t t = 0; t < steps; ++t) {
    if (r[t] > 0.0) EXPECT_GT(rs[t], r[t]);
  }
}

INSTANTIATE_TEST_SUITE_P(Random, MultiviewRewardProperty, ::testing::Range(0, 25));

TEST(Re3Reward, Examples) {
  for (double r : re3_rewards(PointSet::from_scalars({4, 4, 4}), 1, Re3Form::log1p_distance, Re3Aggregate::kth)) {
    EXPECT_EQ(r, 0.0);
  }
  EXPECT_EQ(re3_rewards(kFixture, 1, Re3Form::raw_distance, Re3Aggregate::kth), (std::vector<double>{1, 1, 2}));
  EXPECT_EQ(re3_rewards(kFixture, 2, Re3Form::raw_distance, Re3Aggregate::mean_of_k),
            (std::vector<double>{2, 1.5, 2.5}));
  const auto lg = re3_rewards(kFixture, 2, Re3Form::log1p_distance, Re3Aggregate::mean_of_k);
  EXPECT_NEAR(lg[1], std::log(2.5), 1e-15);
  EXPECT_THROW(re3_rewards(kFixture, 3, Re3Form::raw_distance, Re3Aggregate::kth), KTooLarge);
}

TEST(BetaSchedule, Examples) {
  const BetaSchedule s{0.05, 1e-5};
  EXPECT_EQ(beta_at(s, 0), 0.05);
  EXPECT_NEAR(beta_at(s, 69315), 0.025, 1e-6);
  EXPECT_NEAR(beta_at(s, 10000), 0.05 * std::exp(10000 * std::log1p(-1e-5)), 1e-12);
  // 0.05 * exp(-0.1); 0.0495 is the value at t = 1000.
  EXPECT_NEAR(beta_at(s, 10000), 0.045242, 1e-6);
  EXPECT_NEAR(beta_at(s, 1000), 0.049502, 1e-6);
  const BetaSchedule flat{0.3, 0.0};
  for (std::int64_t t : {0, 1, 1000, 1000000}) EXPECT_EQ(beta_at(flat, t), 0.3);
}

TEST(BetaSchedule, NonincreasingAndValidated) {
  const BetaSchedule s{0.1, 1e-3};
  double prev = beta_at(s, 0);
  EXPECT_EQ(prev, 0.1);
  for (std::int64_t t = 1; t < 5000; ++t) {
    const double b = beta_at(s, t);
    EXPECT_LE(b, prev);
    EXPECT_GE(b, 0.0);
    prev = b;
  }
  EXPECT_THROW((BetaSchedule{-1.0, 0.0}.validate()), ConfigInvalid);
  EXPECT_THROW((BetaSchedule{0.1, 1.0}.validate()), ConfigInvalid);
}

TEST(TotalReward, ForcedArithmetic) {
  EXPECT_NEAR(total_reward(1.0, 2.0, 0.05), 1.1, 1e-15);
  EXPECT_EQ(total_reward(0.7, 123.0, 0.0), 0.7);
  EXPECT_NEAR(total_reward(0.0, 0.5493, 0.1), 0.05493, 1e-15);
}
