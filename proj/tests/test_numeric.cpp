#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hhn/errors.hpp"
#include "hhn/kernels.hpp"
#include "hhn/ops.hpp"
#include "test_util.hpp"

using namespace hhn;
using hhn::testing::naive_matmul;
using hhn::testing::random_matrix;

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  std::mt19937_64 rng(1);
  const DenseMatrix m = random_matrix(3, 4, rng);
  EXPECT_EQ(matmul(DenseMatrix::identity(3), m), m);
}

TEST(Matmul, HandExample) {
  const DenseMatrix out = matmul({{1, 2}, {3, 4}}, {{0}, {1}});
  EXPECT_EQ(out, (DenseMatrix{{2}, {4}}));
}

TEST(Matmul, MatchesTripleLoopOracle) {
  std::mt19937_64 rng(2);
  const DenseMatrix a = random_matrix(5, 4, rng), b = random_matrix(4, 3, rng);
  EXPECT_LE(max_abs_diff(matmul(a, b), naive_matmul(a, b)), 1e-12);
  EXPECT_LE(max_abs_diff(matmul_tn(a.transpose(), b), naive_matmul(a, b)), 1e-12);
  EXPECT_LE(max_abs_diff(matmul_nt(a, b.transpose()), naive_matmul(a, b)), 1e-12);
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  try {
    matmul(DenseMatrix(2, 3), DenseMatrix(2, 3));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos);
  }
  EXPECT_THROW(matmul_tn(DenseMatrix(2, 3), DenseMatrix(3, 3)), DimensionError);
  EXPECT_THROW(matmul_nt(DenseMatrix(2, 3), DenseMatrix(3, 2)), DimensionError);
}

TEST(Matmul, NonFiniteResultIsRejected) {
  DenseMatrix a(1, 1, 1e200), b(1, 1, 1e200);
  EXPECT_THROW(matmul(a, b), EvaluationError);
}

TEST(Matmul, ParallelKernelsAreBitwiseEqualToSerial) {
  std::mt19937_64 rng(3);
  set_worker_threads(4);
  const DenseMatrix a = random_matrix(101, 144, rng), b = random_matrix(144, 64, rng);
  EXPECT_EQ(matmul(a, b), serial::matmul(a, b));
  set_worker_threads(0);
}

TEST(Matmul, ParallelTransposedKernelsMatchSerial) {
  std::mt19937_64 rng(4);
  set_worker_threads(4);
  const DenseMatrix a = random_matrix(300, 128, rng), b = random_matrix(300, 80, rng), c = random_matrix(90, 128, rng);
  EXPECT_EQ(matmul_tn(a, b), serial::matmul_tn(a, b));
  EXPECT_EQ(matmul_nt(a, c), serial::matmul_nt(a, c));
  set_worker_threads(0);
}

TEST(MatmulProperty, Associativity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix a = random_matrix(4, 5, rng), b = random_matrix(5, 3, rng), c = random_matrix(3, 6, rng);
    const DenseMatrix left = matmul(matmul(a, b), c), right = matmul(a, matmul(b, c));
    double scale = 0.0;
    for (double v : left.values()) scale = std::max(scale, std::abs(v));
    EXPECT_LE(max_abs_diff(left, right), 1e-9 * std::max(1.0, scale));
  }
}

TEST(Activation, LeakyReluAtTwoPoints) {
  const DenseMatrix out = apply_activation({{-1.0, 2.0}}, Activation::leaky_relu(0.2));
  EXPECT_DOUBLE_EQ(out(0, 0), -0.2);
  EXPECT_DOUBLE_EQ(out(0, 1), 2.0);
}

TEST(Activation, SigmoidAtZero) { EXPECT_DOUBLE_EQ(activate(0.0, Activation::sigmoid()), 0.5); }

TEST(Activation, EluAtMinusOne) {
  // e^-1 - 1, evaluated independently
  EXPECT_NEAR(activate(-1.0, Activation::elu()), -0.6321205588285577, 1e-15);
}

TEST(Activation, IdentityIsBitwiseFixpoint) {
  std::mt19937_64 rng(6);
  const DenseMatrix m = random_matrix(7, 3, rng);
  EXPECT_EQ(apply_activation(m, Activation::identity()), m);
}

TEST(Activation, UnknownNameAndBadSlopeAreConfigErrors) {
  EXPECT_THROW(parse_activation("tanh"), ConfigError);
  EXPECT_THROW(apply_activation(DenseMatrix(1, 1), Activation::leaky_relu(1.5)), ConfigError);
  EXPECT_EQ(parse_activation("elu").kind, ActivationKind::elu);
}

TEST(Softmax, UniformRow) {
  const DenseMatrix p = rowwise_softmax({{0, 0, 0}});
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p(0, j), 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LargeLogitsDoNotOverflow) {
  const DenseMatrix p = rowwise_softmax({{1000, 1000}});
  EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(p(0, 1), 0.5);
}

TEST(Softmax, MatchesDirectOracle) {
  const DenseMatrix p = rowwise_softmax({{1, 2, 3}});
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(p(0, j), std::exp(j + 1.0) / z, 1e-12);
  // numpy reference
  EXPECT_NEAR(p(0, 2), 0.6652409557748218, 1e-12);
}

TEST(Softmax, MaskedEntriesAreZeroAndFullyMaskedRowIsNamed) {
  Mask mask(2, 3);
  mask.set(0, 1, false);
  const DenseMatrix p = rowwise_softmax({{1, 5, 1}, {0, 0, 0}}, mask);
  EXPECT_EQ(p(0, 1), 0.0);
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  Mask dead(2, 2);
  dead.set(1, 0, false);
  dead.set(1, 1, false);
  try {
    rowwise_softmax({{0, 0}, {0, 0}}, dead);
    FAIL() << "expected DegenerateRowError";
  } catch (const DegenerateRowError& e) {
    EXPECT_EQ(e.row(), 1u);
  }
}

TEST(SoftmaxProperty, RowsSumToOneAndShiftInvariant) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    DenseMatrix m = random_matrix(4, 6, rng, 3.0);
    const DenseMatrix p = rowwise_softmax(m);
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0.0;
      for (double v : p.row(r)) s += v;
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
    for (double& v : m.values()) v += 17.5;
    EXPECT_LE(max_abs_diff(rowwise_softmax(m), p), 1e-12);
  }
}

TEST(Concat, EmptyLeftOperand) {
  const DenseMatrix b{{1, 2}, {3, 4}};
  EXPECT_EQ(concat_cols(DenseMatrix(2, 0), b), b);
}

TEST(Concat, ScalarsAndColumnOrder) {
  EXPECT_EQ(concat_cols({{1}}, {{2}}), (DenseMatrix{{1, 2}}));
  std::mt19937_64 rng(8);
  const DenseMatrix a = random_matrix(3, 2, rng), b = random_matrix(3, 3, rng);
  const DenseMatrix c = concat_cols(a, b);
  ASSERT_EQ(c.cols(), 5u);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(c(r, k), a(r, k));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(c(r, 2 + k), b(r, k));
  }
  const auto [l, rgt] = split_cols(c, 2);
  EXPECT_EQ(l, a);
  EXPECT_EQ(rgt, b);
  EXPECT_THROW(concat_cols(DenseMatrix(2, 1), DenseMatrix(3, 1)), DimensionError);
}

TEST(GradCheck, QuadraticIsExact) {
  ParamTensor x("x", DenseMatrix{{3.0}});
  x.grad(0, 0) = 6.0;
  ParamTensor* ps[] = {&x};
  const auto r = finite_diff_grad_check(ps, [&] { return x.value(0, 0) * x.value(0, 0); }, 1e-5, 1e-8);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.max_rel_error, 1e-8);
}

TEST(GradCheck, CorruptedGradientIsLocated) {
  ParamTensor w("w", DenseMatrix{{1.0, 2.0}, {3.0, 4.0}});
  auto loss = [&] {
    double s = 0.0;
    for (double v : w.value.values()) s += v * v * v;
    return s;
  };
  for (std::size_t k = 0; k < 4; ++k) w.grad.data()[k] = 3.0 * w.value.data()[k] * w.value.data()[k];
  w.grad(1, 0) += 0.1;
  ParamTensor* ps[] = {&w};
  const auto r = finite_diff_grad_check(ps, loss, 1e-5, 1e-4);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.worst_param, "w");
  EXPECT_EQ(r.worst_row, 1u);
  EXPECT_EQ(r.worst_col, 0u);
}

TEST(GradCheck, EpsOutOfRangeAndNonFiniteLoss) {
  ParamTensor x("x", DenseMatrix{{1.0}});
  ParamTensor* ps[] = {&x};
  EXPECT_THROW(finite_diff_grad_check(ps, [] { return 0.0; }, 1e-2, 1e-4), ConfigError);
  EXPECT_THROW(finite_diff_grad_check(ps, [] { return std::nan(""); }, 1e-5, 1e-4), EvaluationError);
}

TEST(Backward, ActivationAndSoftmaxMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  const DenseMatrix weights = random_matrix(3, 4, rng);
  for (const Activation act : {Activation::elu(), Activation::sigmoid(), Activation::leaky_relu(0.2)}) {
    ParamTensor x("x", random_matrix(3, 4, rng));
    auto loss = [&] {
      const DenseMatrix y = apply_activation(x.value, act);
      double s = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) s += y.data()[k] * weights.data()[k];
      return s;
    };
    x.grad = activation_backward(x.value, weights, act);
    ParamTensor* ps[] = {&x};
    EXPECT_TRUE(finite_diff_grad_check(ps, loss, 1e-5, 1e-4).passed) << activation_name(act.kind);
  }
  ParamTensor z("z", random_matrix(3, 4, rng));
  auto loss = [&] {
    const DenseMatrix p = rowwise_softmax(z.value);
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += p.data()[k] * weights.data()[k];
    return s;
  };
  z.grad = softmax_backward(rowwise_softmax(z.value), weights);
  ParamTensor* ps[] = {&z};
  EXPECT_TRUE(finite_diff_grad_check(ps, loss, 1e-5, 1e-4).passed);
}
