#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "mem/ad/adam.hpp"
#include "mem/ad/checkpoint.hpp"
#include "mem/ad/gradcheck.hpp"
#include "mem/ad/layers.hpp"
#include "mem/ad/tape.hpp"
#include "mem/errors.hpp"
#include "mem/rng.hpp"

using namespace mem;
using namespace mem::ad;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t = Tensor::matrix(r, c);
  for (double& x : t.data()) x = rng.normal();
  return t;
}

Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::matrix(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(k, j);
      out.at(i, j) = s;
    }
  return out;
}

}  // namespace

TEST(Matmul, IdentityAndForcedArithmetic) {
  const Tensor eye = Tensor::matrix({{1, 0}, {0, 1}});
  const Tensor m = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(eye, m), m);
  EXPECT_EQ(matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}})).item(), 11.0);
}

TEST(Matmul, MatchesTripleLoop) {
  Rng rng(7);
  const Tensor a = random_matrix(5, 7, rng);
  const Tensor b = random_matrix(7, 3, rng);
  const Tensor got = matmul(a, b);
  const Tensor want = naive_matmul(a, b);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Matmul, InnerDimensionMismatch) {
  EXPECT_THROW(matmul(Tensor::matrix(2, 3), Tensor::matrix(2, 3)), ShapeMismatch);
  Tape tape;
  EXPECT_THROW(matmul(tape.constant(Tensor::matrix(2, 3)), tape.constant(Tensor::matrix(2, 3))), ShapeMismatch);
}

TEST(TensorInvariant, ShapeProductMatchesData) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeMismatch);
  EXPECT_EQ(Tensor({2, 3}).size(), 6u);
}

TEST(LayerNorm, Examples) {
  for (double x : layer_norm(std::vector<double>{3, 3, 3}, 1e-5)) EXPECT_EQ(x, 0.0);
  const auto unit = layer_norm(std::vector<double>{-1, 1}, 1e-15);
  EXPECT_NEAR(unit[0], -1.0, 1e-12);
  EXPECT_NEAR(unit[1], 1.0, 1e-12);
  const auto v = layer_norm(std::vector<double>{0, 2, 4}, 1e-5);
  EXPECT_NEAR(v[0], -1.2247, 1e-4);
  EXPECT_NEAR(v[1], 0.0, 1e-12);
  EXPECT_NEAR(v[2], 1.2247, 1e-4);
}

TEST(CosineSimilarity, Examples) {
  EXPECT_EQ(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity(std::vector<double>{2, 0}, std::vector<double>{5, 0}), 1.0, 1e-15);
  EXPECT_NEAR(cosine_similarity(std::vector<double>{1, 1}, std::vector<double>{1, 0}), 0.7071, 1e-4);
  EXPECT_THROW(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}), DegenerateVector);
}

TEST(SoftmaxCrossEntropy, Examples) {
  EXPECT_NEAR(softmax_cross_entropy(std::vector<double>{0.3, 0.3, 0.3}, 2), std::log(3.0), 1e-12);
  EXPECT_NEAR(softmax_cross_entropy(std::vector<double>{-1000, 1000, -1000}, 1), 0.0, 1e-12);
  EXPECT_NEAR(softmax_cross_entropy(std::vector<double>{1, 0}, 0), 0.3133, 1e-4);
  EXPECT_THROW(softmax_cross_entropy(std::vector<double>{1, 0}, 2), IndexOutOfRange);
}

TEST(Backward, ForcedCalculus) {
  ParamStore ps;
  ps.add("w", Tensor::scalar(3.0));
  {
    Tape tape;
    Var w = tape.param(ps, "w");
    tape.backward(mul(w, w));
  }
  EXPECT_EQ(ps.grad("w").item(), 6.0);

  ps.zero_grad();
  {
    Tape tape;
    tape.param(ps, "w");
    tape.backward(sum(tape.constant(Tensor::scalar(5.0))));
  }
  EXPECT_EQ(ps.grad("w").item(), 0.0);
}

TEST(Backward, NonScalarOutput) {
  ParamStore ps;
  ps.add("w", Tensor::matrix(2, 2, 1.0));
  Tape tape;
  EXPECT_THROW(tape.backward(tape.param(ps, "w")), NonScalarOutput);
}

TEST(ParamStore, GradientShapesAndZeroing) {
  Rng rng(1);
  ParamStore ps;
  init_linear(ps, "fc", 4, 3, rng);
  for (const auto& n : ps.names()) EXPECT_EQ(ps.grad(n).shape(), ps.value(n).shape());
  Tape tape;
  tape.backward(sum(linear(tape, ps, "fc", tape.constant(random_matrix(2, 4, rng)))));
  ps.zero_grad();
  for (const auto& n : ps.names())
    for (double g : ps.grad(n).data()) EXPECT_EQ(g, 0.0);
}

// Each op, composed into a scalar, against central finite differences.
class OpGradient : public ::testing::TestWithParam<int> {};

TEST_P(OpGradient, MatchesFiniteDifferences) {
  Rng rng(1000 + GetParam());
  ParamStore ps;
  ps.add("a", random_matrix(4, 5, rng));
  ps.add("b", random_matrix(4, 5, rng));
  ps.add("w", random_matrix(5, 3, rng));
  ps.add("bias", random_matrix(1, 3, rng));
  const std::vector<std::size_t> labels = {0, 2, 1, 2};
  const Tensor weights = random_matrix(4, 1, rng);

  auto loss = [&](Tape& t) {
    Var a = t.param(ps, "a"), b = t.param(ps, "b");
    Var h = add_row(matmul(relu(a), t.param(ps, "w")), t.param(ps, "bias"));
    Var terms[] = {
        sum(square(sub(a, b))),
        mean(l1_rows(mul(a, b))),
        sum(l2norm_rows(add_scalar(scale(a, 0.5), 0.1))),
        sum(cosine_rows(a, b)),
        sum(mul(layer_norm_rows(add(a, b)), t.constant(random_matrix(4, 5, rng)))),
        mean(softmax_cross_entropy_rows(h, labels)),
        mean(uniform_cross_entropy_rows(h)),
        sum(mul(entropy_rows(h), t.constant(weights))),
        sum(gather_cols(h, labels)),
        sum(square(sub(a, group_centroids(a, {0, 1, 0, 1}, false)))),
        sum(square(relu(add_scalar(scale(l2norm_rows(sub(b, group_centroids(b, {0, 1, 1, 2}, true))), -1.0), 3.0)))),
        sum(sum_rows(h)),
    };
    Var total = terms[0];
    for (std::size_t i = 1; i < std::size(terms); ++i) total = add(total, terms[i]);
    return total;
  };
  // The constant drawn inside the closure must be identical per evaluation.
  const Rng fixed = rng;
  auto deterministic = [&](Tape& t) {
    rng = fixed;
    return loss(t);
  };
  const GradCheckResult r = check_gradients({&ps}, deterministic);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
  EXPECT_GT(r.checked, 0u);
  EXPECT_LE(r.skipped, r.checked / 50);
}

INSTANTIATE_TEST_SUITE_P(RandomInstances, OpGradient, ::testing::Range(0, 100));

TEST(Backward, Linearity) {
  Rng rng(3);
  ParamStore ps;
  ps.add("x", random_matrix(3, 4, rng));
  auto f = [&](Tape& t) { return sum(square(t.param(ps, "x"))); };
  auto g = [&](Tape& t) { return mean(l2norm_rows(t.param(ps, "x"))); };
  auto grad_of = [&](const std::function<Var(Tape&)>& fn) {
    ps.zero_grad();
    Tape t;
    t.backward(fn(t));
    return ps.grad("x");
  };
  const Tensor gf = grad_of(f), gg = grad_of(g);
  const Tensor combined = grad_of([&](Tape& t) { return add(scale(f(t), 2.5), scale(g(t), -0.75)); });
  for (std::size_t i = 0; i < combined.size(); ++i) EXPECT_NEAR(combined[i], 2.5 * gf[i] - 0.75 * gg[i], 1e-12);
}

TEST(Backward, DeterministicReplay) {
  Rng rng(4);
  ParamStore ps;
  init_linear(ps, "l1", 6, 8, rng);
  init_linear(ps, "l2", 8, 3, rng);
  const Tensor x = random_matrix(5, 6, rng);
  auto run = [&]() {
    ps.zero_grad();
    Tape t;
    Var out = mean(uniform_cross_entropy_rows(linear(t, ps, "l2", relu(linear(t, ps, "l1", t.constant(x))))));
    t.backward(out);
    return std::make_pair(out.value().item(), ps.grad("l1.weight"));
  };
  const auto first = run();
  const auto second = run();
  EXPECT_EQ(first.first, second.first);
  EXPECT_EQ(first.second, second.second);
}

TEST(Backward, ReluDerivativeAtZeroIsZero) {
  ParamStore ps;
  ps.add("x", Tensor::matrix({{0.0, 1.0, -1.0}}));
  Tape t;
  t.backward(sum(relu(t.param(ps, "x"))));
  EXPECT_EQ(ps.grad("x"), Tensor::matrix({{0.0, 1.0, 0.0}}));
}

TEST(Checkpoint, BitExactRoundTrip) {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(50 + trial);
    Checkpoint ckpt;
    const std::size_t count = 1 + rng.uniform_int(5);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t r = 1 + rng.uniform_int(4), c = 1 + rng.uniform_int(4);
      Tensor t = random_matrix(r, c, rng);
      t[0] = (trial % 2) ? -0.0 : 1e-310;  // signed zero and subnormals survive
      ckpt.emplace("p" + std::to_string(i) + "/w", std::move(t));
    }
    std::stringstream buf;
    write_checkpoint(buf, ckpt);
    const std::string bytes = buf.str();
    EXPECT_EQ(bytes.substr(0, 8), "MEMCKPT1");
    std::stringstream in(bytes);
    const Checkpoint back = read_checkpoint(in);
    ASSERT_EQ(back.size(), ckpt.size());
    for (const auto& [name, t] : ckpt) {
      const Tensor& u = back.at(name);
      ASSERT_EQ(u.shape(), t.shape());
      EXPECT_EQ(std::memcmp(u.data().data(), t.data().data(), t.size() * sizeof(double)), 0);
    }
    std::stringstream again;
    write_checkpoint(again, back);
    EXPECT_EQ(again.str(), bytes);
  }
}

TEST(Checkpoint, CorruptInputsAreRejected) {
  Checkpoint ckpt{{"w", Tensor::matrix({{1, 2}})}};
  std::stringstream buf;
  write_checkpoint(buf, ckpt);
  const std::string bytes = buf.str();

  std::stringstream bad_magic("XEMCKPT1" + bytes.substr(8));
  EXPECT_THROW(read_checkpoint(bad_magic), CheckpointCorrupt);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_checkpoint(truncated), CheckpointCorrupt);
  std::stringstream trailing(bytes + "x");
  EXPECT_THROW(read_checkpoint(trailing), CheckpointCorrupt);
}

TEST(Checkpoint, LayoutIsLittleEndian) {
  Checkpoint ckpt{{"ab", Tensor::matrix({{1.0}})}};
  std::stringstream buf;
  write_checkpoint(buf, ckpt);
  const std::string b = buf.str();
  // magic(8) + count(8) + namelen(4) + "ab" + rank(4) + dims(16) + payload(8)
  ASSERT_EQ(b.size(), 8u + 8 + 4 + 2 + 4 + 16 + 8);
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 1);
  EXPECT_EQ(static_cast<unsigned char>(b[16]), 2);
  EXPECT_EQ(static_cast<unsigned char>(b[22]), 2);
  EXPECT_EQ(static_cast<unsigned char>(b[26]), 1);
  EXPECT_EQ(static_cast<unsigned char>(b[34]), 1);
  EXPECT_EQ(static_cast<unsigned char>(b[49]), 0x3f);  // top byte of 1.0
  EXPECT_EQ(static_cast<unsigned char>(b[48]), 0xf0);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Rng rng(9);
  ParamStore ps;
  init_linear(ps, "fc", 3, 2, rng);
  const ParamStore before = ps;
  Adam adam({.learning_rate = 1e-3});
  adam.step(ps);
  EXPECT_TRUE(ps == before);
}

TEST(Adam, DescendsQuadratic) {
  ParamStore ps;
  ps.add("x", Tensor::matrix({{3.0, -2.0}}));
  Adam adam({.learning_rate = 0.05});
  for (int i = 0; i < 500; ++i) {
    ps.zero_grad();
    Tape t;
    t.backward(sum(square(t.param(ps, "x"))));
    adam.step(ps);
  }
  EXPECT_LT(std::abs(ps.value("x")[0]), 0.05);
  EXPECT_LT(std::abs(ps.value("x")[1]), 0.05);
}
