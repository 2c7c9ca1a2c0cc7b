#include <comgrl/adam.hpp>
#include <comgrl/ops.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/gradient_cases.hpp"
#include "support/oracles.hpp"

using namespace comgrl;

namespace {

std::mt19937_64 rng_for(int seed) { return std::mt19937_64(1000 + seed); }

}  // namespace

TEST(Matmul, MatchesTripleLoop) {
  auto rng = rng_for(0);
  Matrix a = oracle::random_matrix(3, 4, rng);
  Matrix b = oracle::random_matrix(4, 2, rng);
  Matrix got = matmul(Tensor::constant(a), Tensor::constant(b)).value();
  EXPECT_LE((got - oracle::matmul(a, b)).cwiseAbs().maxCoeff(), oracle::kExact);
}

TEST(Matmul, RejectsShapeMismatchNamingShapes) {
  try {
    matmul(Tensor::constant(Matrix::Zero(2, 3)), Tensor::constant(Matrix::Zero(2, 3)));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos);
  }
}

TEST(Softmax, ZeroRowIsUniform) {
  Matrix x = Matrix::Zero(1, 2);
  Matrix y = row_softmax(Tensor::constant(x)).value();
  EXPECT_DOUBLE_EQ(y(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(y(0, 1), 0.5);
}

TEST(Softmax, NormalizedAndPositiveAlongAxis) {
  for (int seed = 0; seed < 5; ++seed) {
    auto rng = rng_for(seed);
    Matrix x = oracle::random_matrix(7, 5, rng, -30.0, 30.0);
    Matrix r = row_softmax(Tensor::constant(x)).value();
    Matrix c = col_softmax(Tensor::constant(x)).value();
    EXPECT_GT(r.minCoeff(), 0.0);
    EXPECT_GT(c.minCoeff(), 0.0);
    EXPECT_LE((r.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
    EXPECT_LE((c.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
    EXPECT_LE((r - oracle::row_softmax(x)).cwiseAbs().maxCoeff(), oracle::kExact);
    EXPECT_LE((c - oracle::col_softmax(x)).cwiseAbs().maxCoeff(), oracle::kExact);
  }
}

TEST(LayerNorm, ConstantRowStaysFinite) {
  Matrix x = Matrix::Constant(2, 4, 3.0);
  Matrix y = layer_norm(Tensor::constant(x), Tensor::constant(Matrix::Ones(1, 4)),
                        Tensor::constant(Matrix::Zero(1, 4)))
                 .value();
  EXPECT_TRUE(y.allFinite());
  EXPECT_EQ(y.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LayerNorm, MatchesOracle) {
  auto rng = rng_for(3);
  Matrix x = oracle::random_matrix(5, 6, rng);
  Matrix g = oracle::random_matrix(1, 6, rng);
  Matrix b = oracle::random_matrix(1, 6, rng);
  Matrix y = layer_norm(Tensor::constant(x), Tensor::constant(g), Tensor::constant(b)).value();
  EXPECT_LE((y - oracle::layer_norm(x, g, b)).cwiseAbs().maxCoeff(), oracle::kExact);
}

TEST(Cosine, SelfSimilarityIsOne) {
  auto rng = rng_for(1);
  Matrix x = oracle::random_matrix(4, 3, rng);
  Matrix s = cosine_similarity(Tensor::constant(x), Tensor::constant(x)).value();
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(s(i, i), 1.0, oracle::kExact);
  EXPECT_LE(s.maxCoeff(), 1.0 + oracle::kExact);
  EXPECT_GE(s.minCoeff(), -1.0 - oracle::kExact);
}

TEST(Cosine, ZeroRowScoresZero) {
  Matrix x(2, 2);
  x << 0, 0, 1, 2;
  Matrix s = cosine_similarity(Tensor::constant(x), Tensor::constant(x)).value();
  EXPECT_EQ(s(0, 0), 0.0);
  EXPECT_EQ(s(0, 1), 0.0);
  EXPECT_TRUE(s.allFinite());
}

TEST(Dropout, EvalModeIsIdentity) {
  std::mt19937_64 rng(5);
  Tensor x = Tensor::constant(Matrix::Random(4, 4));
  Tensor y = dropout(x, 0.5, false, rng);
  EXPECT_EQ(y.value(), x.value());
}

TEST(Dropout, InvertedScaling) {
  std::mt19937_64 rng(5);
  Tensor x = Tensor::constant(Matrix::Ones(50, 40));
  Matrix y = dropout(x, 0.25, true, rng).value();
  for (Index i = 0; i < y.size(); ++i) {
    const double v = y.data()[i];
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-15);
  }
  // Mean stays near one: 2000 Bernoulli draws, 4 sigma.
  EXPECT_NEAR(y.mean(), 1.0, 4.0 * std::sqrt(0.25 / 0.75 / 2000.0));
}

TEST(Backward, SumGivesOnes) {
  Tensor w = Tensor::parameter(Matrix::Random(2, 2));
  sum(w).backward();
  EXPECT_EQ(w.grad(), Matrix::Ones(2, 2));
}

TEST(Backward, AccumulatesUntilReset) {
  Tensor w = Tensor::parameter(Matrix::Random(2, 2));
  sum(w).backward();
  sum(w).backward();
  EXPECT_EQ(w.grad(), Matrix::Constant(2, 2, 2.0));
  w.zero_grad();
  EXPECT_FALSE(w.has_grad());
}

TEST(Backward, RejectsNonScalar) {
  Tensor w = Tensor::parameter(Matrix::Random(2, 2));
  EXPECT_THROW(w.backward(), ShapeError);
}

TEST(Backward, UnreachableParametersStayEmpty) {
  Tensor a = Tensor::parameter(Matrix::Random(2, 2));
  Tensor b = Tensor::parameter(Matrix::Random(2, 2));
  Tensor c = Tensor::constant(Matrix::Random(2, 2));
  sum(matmul(a, c)).backward();
  EXPECT_TRUE(a.has_grad());
  EXPECT_FALSE(b.has_grad());
  EXPECT_FALSE(c.has_grad());
}

TEST(Backward, SharedSubexpressionCountsBothPaths) {
  Tensor w = Tensor::parameter(Matrix::Constant(1, 1, 3.0));
  Tensor y = hadamard(w, w);  // w^2
  sum(add(y, w)).backward();
  EXPECT_DOUBLE_EQ(w.grad()(0, 0), 7.0);
}

// Finite-difference checks on every primitive, 5 seeds, shapes up to 8x8.
class PrimitiveGradients : public ::testing::TestWithParam<int> {};

TEST_P(PrimitiveGradients, CentralDifferences) {
  for (const auto& r : oracle::primitive_gradient_errors(GetParam())) {
    EXPECT_LT(r.error, oracle::kGradPrimitive) << r.name;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PrimitiveGradients, ::testing::Range(0, 5));

TEST(CrossEntropy, RejectsEmptyNodeSet) {
  std::vector<int> labels{0};
  EXPECT_THROW(cross_entropy(Tensor::constant(Matrix::Ones(1, 1)), labels, {}),
               std::invalid_argument);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor w = Tensor::parameter(Matrix::Zero(1, 1));
  Adam opt({w}, AdamOptions{.learning_rate = 0.1});
  w.node().grad = Matrix::Ones(1, 1);
  opt.step();
  EXPECT_NEAR(w.value()(0, 0), -0.1, 1e-8);
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(Adam, ZeroGradientLeavesParameter) {
  Tensor w = Tensor::parameter(Matrix::Constant(2, 2, 0.7));
  Adam opt({w}, AdamOptions{.learning_rate = 0.1});
  w.node().grad = Matrix::Zero(2, 2);
  opt.step();
  EXPECT_EQ(w.value(), Matrix::Constant(2, 2, 0.7));
}

TEST(Adam, MissingGradientIsSkipped) {
  Tensor w = Tensor::parameter(Matrix::Constant(1, 1, 0.3));
  Adam opt({w}, AdamOptions{.learning_rate = 0.1});
  opt.step();
  EXPECT_EQ(w.value()(0, 0), 0.3);
}

TEST(Adam, TwoStepTraceMatchesScript) {
  // Scripted update rule, gradients 0.5 then -2.0 from w = 1.
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double w_ref = 1.0, m = 0.0, v = 0.0;
  const double grads[] = {0.5, -2.0};
  Tensor w = Tensor::parameter(Matrix::Ones(1, 1));
  Adam opt({w}, AdamOptions{.learning_rate = lr});
  for (int t = 1; t <= 2; ++t) {
    const double g = grads[t - 1];
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    w_ref -= lr * mhat / (std::sqrt(vhat) + eps);
    w.node().grad = Matrix::Constant(1, 1, g);
    opt.step();
    EXPECT_NEAR(w.value()(0, 0), w_ref, 1e-14) << "step " << t;
  }
}

TEST(Adam, DecoupledWeightDecay) {
  Tensor w = Tensor::parameter(Matrix::Constant(1, 1, 2.0));
  Adam opt({w}, AdamOptions{.learning_rate = 0.1, .weight_decay = 0.5});
  w.node().grad = Matrix::Zero(1, 1);
  opt.step();
  EXPECT_NEAR(w.value()(0, 0), 2.0 * (1.0 - 0.05), 1e-15);
}
