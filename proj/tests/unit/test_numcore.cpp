#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "turnkan/numcore/adam.hpp"
#include "turnkan/numcore/gradcheck.hpp"
#include "turnkan/numcore/ops.hpp"

using namespace turnkan;
using namespace turnkan::num;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.data()) v = u(rng);
  return t;
}

// Random projection so that every output entry reaches the loss with an O(1) weight.
Var project(Tape& t, Var y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sum(mul(y, t.constant(random_tensor(y.shape(), rng, 0.5, 1.5))));
}

}  // namespace

TEST(Tensor, RejectsMismatchedData) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_EQ(Tensor({2, 3}).size(), 6u);
}

TEST(Parameter, ZeroGradClearsAccumulation) {
  Parameter p("w", Tensor({3}, {1, 2, 3}));
  p.grad.fill(4);
  p.zero_grad();
  for (double g : p.grad.data()) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(p.grad.shape(), p.value.shape());
}

TEST(ForwardBackward, SquareAtThree) {
  Parameter x("x", Tensor({1}, {3.0}));
  Parameter* ps[] = {&x};
  auto r = forward_backward([&](Tape& t) { return sum(square(t.param(x))); }, ps);
  EXPECT_DOUBLE_EQ(r.output, 9.0);
  EXPECT_DOUBLE_EQ(r.gradients[0][0], 6.0);
}

TEST(ForwardBackward, SumGivesOnes) {
  std::mt19937_64 rng(3);
  Parameter x("x", random_tensor({4, 5}, rng));
  Parameter* ps[] = {&x};
  auto r = forward_backward([&](Tape& t) { return sum(t.param(x)); }, ps);
  for (double g : r.gradients[0].data()) EXPECT_EQ(g, 1.0);
}

TEST(ForwardBackward, TanhOfLinearMatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  Parameter W("W", random_tensor({3, 3}, rng));
  const Tensor v = random_tensor({1, 3}, rng);
  Graph g = [&](Tape& t) { return sum(tanh(matmul(t.constant(v), t.param(W)))); };
  EXPECT_LT(finite_diff_check(g, W, 1e-4), 1e-6);
}

TEST(ForwardBackward, RejectsShapeMismatchNamingOp) {
  Tape t;
  Var a = t.input(Tensor({2, 3}));
  Var b = t.input(Tensor({4, 2}));
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
  }
  EXPECT_THROW(add(a, b), ShapeError);
}

TEST(ForwardBackward, RejectsNonScalarRoot) {
  Tape t;
  Var a = t.input(Tensor({2, 3}, 1.0));
  EXPECT_THROW(t.backward(tanh(a)), ShapeError);
}

TEST(FiniteDiff, LinearLayerIsExact) {
  std::mt19937_64 rng(5);
  Parameter W("W", random_tensor({4, 3}, rng));
  Parameter b("b", random_tensor({3}, rng));
  const Tensor x = random_tensor({5, 4}, rng);
  Graph g = [&](Tape& t) { return project(t, add_bias(matmul(t.constant(x), t.param(W)), t.param(b)), 9); };
  EXPECT_LT(finite_diff_check(g, W, 1e-4), 1e-8);
  EXPECT_LT(finite_diff_check(g, b, 1e-4), 1e-8);
}

TEST(FiniteDiff, ReluAwayFromKink) {
  std::mt19937_64 rng(6);
  Parameter x("x", random_tensor({20}, rng));
  for (double& v : x.value.data()) {
    if (std::abs(v) < 0.05) v = 0.3;
  }
  Graph g = [&](Tape& t) { return project(t, relu(t.param(x)), 1); };
  EXPECT_LT(finite_diff_check(g, x, 1e-4), 1e-6);
}

TEST(FiniteDiff, ConstantGraphHasZeroError) {
  Parameter x("x", Tensor({3}, {1, 2, 3}));
  Graph g = [&](Tape& t) {
    t.param(x);
    return sum(t.constant(Tensor({2}, {4, 5})));
  };
  EXPECT_EQ(finite_diff_check(g, x, 1e-4), 0.0);
  EXPECT_THROW(finite_diff_check(g, x, 0.0), DomainError);
}

// Every differentiable op over 100 seeds, away from non-smooth points.
TEST(FiniteDiff, AllOpsOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    Parameter a("a", random_tensor({3, 4}, rng));
    Parameter b("b", random_tensor({3, 4}, rng));
    Parameter w("w", random_tensor({4, 2}, rng));
    Parameter bias("bias", random_tensor({2}, rng));
    for (double& v : a.value.data()) {
      if (std::abs(v) < 1e-3) v += 0.01;
    }
    Graph elementwise = [&](Tape& t) {
      Var x = t.param(a);
      Var y = t.param(b);
      Var z = add(mul(tanh(x), sigmoid(y)), add(silu(x), relu(x)));
      z = add(z, add(scale(square(y), 0.3), reshape(reshape(x, {12}), {3, 4})));
      return add(project(t, z, seed), add(sum_abs(x), mean(y)));
    };
    EXPECT_LT(finite_diff_check(elementwise, a, 1e-4), 1e-4) << "seed " << seed;
    EXPECT_LT(finite_diff_check(elementwise, b, 1e-4), 1e-4) << "seed " << seed;

    Graph dense = [&](Tape& t) { return project(t, add_bias(matmul(t.param(a), t.param(w)), t.param(bias)), seed); };
    EXPECT_LT(finite_diff_check(dense, a, 1e-4), 1e-4);
    EXPECT_LT(finite_diff_check(dense, w, 1e-4), 1e-4);
    EXPECT_LT(finite_diff_check(dense, bias, 1e-4), 1e-4);
  }
}

TEST(FiniteDiff, ConvPoolAndCrossEntropyOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    Parameter x("x", random_tensor({2, 9, 3}, rng));
    Parameter k("k", random_tensor({3, 3, 4}, rng));
    Parameter bias("bias", random_tensor({4}, rng));
    const Padding pad = seed % 2 ? Padding::Same : Padding::Valid;
    const std::vector<int> labels{static_cast<int>(seed % 3), static_cast<int>((seed + 1) % 3)};
    const std::vector<double> weights{0.5, 2.0, 1.25};
    Parameter head("head", random_tensor({4, 3}, rng));
    Graph g = [&](Tape& t) {
      Var h = conv1d(t.param(x), t.param(k), t.param(bias), pad);
      h = maxpool1d(tanh(h), 2);
      Var pooled = global_avg_pool(h);
      Var logits = matmul(pooled, t.param(head));
      return weighted_softmax_cross_entropy(logits, labels, weights);
    };
    // Skip draws where a pooling window holds a near-tie.
    bool tie = false;
    {
      Tape t(false);
      Var h = tanh(conv1d(t.constant(x.value), t.constant(k.value), t.constant(bias.value), pad));
      const Tensor& hv = h.value();
      const std::size_t L = hv.dim(1), C = hv.dim(2);
      for (std::size_t b = 0; b < hv.dim(0); ++b)
        for (std::size_t l = 0; l + 1 < L; l += 2)
          for (std::size_t c = 0; c < C; ++c)
            tie = tie || std::abs(hv[(b * L + l) * C + c] - hv[(b * L + l + 1) * C + c]) < 1e-3;
    }
    if (tie) continue;
    EXPECT_LT(finite_diff_check(g, x, 1e-4), 1e-4) << "seed " << seed;
    EXPECT_LT(finite_diff_check(g, k, 1e-4), 1e-4) << "seed " << seed;
    EXPECT_LT(finite_diff_check(g, bias, 1e-4), 1e-4) << "seed " << seed;
    EXPECT_LT(finite_diff_check(g, head, 1e-4), 1e-4) << "seed " << seed;
  }
}

TEST(Ops, MaxPoolTiesGoToEarliestIndex) {
  Tape t;
  Var x = t.input(Tensor({1, 4, 1}, {2, 2, 1, 1}));
  Var y = maxpool1d(x, 2);
  t.backward(sum(y));
  const Tensor& g = t.grad(x);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_EQ(g[2], 1.0);
  EXPECT_EQ(g[3], 0.0);
}

TEST(Ops, ReluDerivativeAtZeroIsZero) {
  Tape t;
  Var x = t.input(Tensor({1}, {0.0}));
  t.backward(sum(relu(x)));
  EXPECT_EQ(t.grad(x)[0], 0.0);
}

TEST(Ops, ConvOutputLengths) {
  Tape t(false);
  Var x = t.constant(Tensor({1, 30, 6}, 1.0));
  Var k = t.constant(Tensor({7, 6, 5}, 0.1));
  Var b = t.constant(Tensor({5}, 0.0));
  EXPECT_EQ(conv1d(x, k, b, Padding::Valid).shape(), (Shape{1, 24, 5}));
  EXPECT_EQ(conv1d(x, k, b, Padding::Same).shape(), (Shape{1, 30, 5}));
}

TEST(Ops, WeightedCrossEntropyHandExample) {
  Tape t;
  Var z = t.input(Tensor({2, 3}, {1, 0, 0, 0, 1, 0}));
  const std::vector<int> y{0, 1};
  const std::vector<double> w{0.5, 2, 1};
  // -log softmax((1,0,0))_0 = log(e + 2) - 1
  const double nll = std::log(std::exp(1.0) + 2) - 1;
  EXPECT_NEAR(nll, 0.55144, 1e-5);
  EXPECT_NEAR(weighted_softmax_cross_entropy(z, y, w).value().item(), (0.5 * nll + 2 * nll) / 2, 1e-12);
  EXPECT_NEAR(weighted_softmax_cross_entropy(z, y, w).value().item(), 0.68930, 1e-4);
  const std::vector<int> bad{0, 3};
  EXPECT_THROW(weighted_softmax_cross_entropy(z, bad, w), DataError);
}

TEST(Properties, DeterministicForwardBackward) {
  std::mt19937_64 rng(2);
  Parameter W("W", random_tensor({5, 4}, rng));
  const Tensor x = random_tensor({3, 5}, rng);
  Parameter* ps[] = {&W};
  Graph g = [&](Tape& t) { return project(t, silu(matmul(t.constant(x), t.param(W))), 4); };
  const auto r1 = forward_backward(g, ps);
  const auto r2 = forward_backward(g, ps);
  EXPECT_EQ(r1.output, r2.output);
  EXPECT_EQ(r1.gradients[0], r2.gradients[0]);
}

TEST(Properties, BackwardIsLinearInTheLoss) {
  std::mt19937_64 rng(8);
  Parameter W("W", random_tensor({4, 4}, rng));
  const Tensor x = random_tensor({2, 4}, rng);
  Parameter* ps[] = {&W};
  auto f1 = [&](Tape& t) { return sum(tanh(matmul(t.constant(x), t.param(W)))); };
  auto f2 = [&](Tape& t) { return sum_squares(matmul(t.constant(x), t.param(W))); };
  const auto g1 = forward_backward(f1, ps).gradients[0];
  const auto g2 = forward_backward(f2, ps).gradients[0];
  const auto g12 = forward_backward([&](Tape& t) { return add(f1(t), f2(t)); }, ps).gradients[0];
  for (std::size_t i = 0; i < g12.size(); ++i) EXPECT_NEAR(g12[i], g1[i] + g2[i], 1e-12);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::vector<Parameter> ps{Parameter("w", Tensor({3}, {1, -2, 3}))};
  Adam adam({.learning_rate = 0.1});
  for (int i = 0; i < 5; ++i) adam.step(ps);
  EXPECT_EQ(ps[0].value, Tensor({3}, {1, -2, 3}));
}

TEST(Adam, FirstStepIsLearningRateTimesSign) {
  for (double g : {1e-6, 0.3, -7.0, 1e4}) {
    std::vector<Parameter> ps{Parameter("w", Tensor({1}, {0.0}))};
    ps[0].grad[0] = g;
    Adam adam({.learning_rate = 0.01});
    adam.step(ps);
    // m_hat = g, v_hat = g^2: step = lr * g / (|g| + eps)
    EXPECT_NEAR(ps[0].value[0], -0.01 * (g > 0 ? 1 : -1), 0.01 * 1e-8 / std::abs(g) + 1e-15);
  }
}

TEST(Adam, ConvergesOnQuadraticLikeReference) {
  std::vector<Parameter> ps{Parameter("w", Tensor({1}, {0.0}))};
  Adam adam({.learning_rate = 0.1});
  // Scalar reference recursion.
  double w = 0, m = 0, v = 0;
  for (int step = 1; step <= 200; ++step) {
    ps[0].grad[0] = 2 * (ps[0].value[0] - 2);
    adam.step(ps);
    const double g = 2 * (w - 2);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    w -= 0.1 * (m / (1 - std::pow(0.9, step))) / (std::sqrt(v / (1 - std::pow(0.999, step))) + 1e-8);
    ASSERT_NEAR(ps[0].value[0], w, 1e-12);
  }
  EXPECT_LT(std::abs(ps[0].value[0] - 2), 1e-2);
}

TEST(Adam, RejectsNonFiniteGradient) {
  std::vector<Parameter> ps{Parameter("w", Tensor({1}, {0.0}))};
  ps[0].grad[0] = std::nan("");
  Adam adam;
  EXPECT_THROW(adam.step(ps), NumericalError);
}
