#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "turnkan/metrics/confusion.hpp"
#include "turnkan/models/benchmark.hpp"
#include "turnkan/models/serialize.hpp"
#include "turnkan/models/trainer.hpp"
#include "turnkan/numcore/gradcheck.hpp"

using namespace turnkan;
using namespace turnkan::models;
using turnkan::num::Parameter;
using turnkan::num::Tape;
using turnkan::num::Tensor;

namespace {

ModelConfig mlp_config() {
  ModelConfig c;
  c.family = Family::MLP;
  c.window_size = 10;
  c.hidden = {12, 7};
  c.activation = StaticActivation::Tanh;
  return c;
}

ModelConfig kan_config() {
  ModelConfig c;
  c.family = Family::KAN;
  c.window_size = 10;
  c.hidden = {5};
  c.grid_size = 5;
  c.spline_order = 3;
  return c;
}

ModelConfig cnn_config(Padding pad = Padding::Same) {
  ModelConfig c;
  c.family = Family::CNN;
  c.window_size = 20;
  c.filters = {6, 5};
  c.kernels = {7, 7};
  c.pools = {2, 1};
  c.padding = pad;
  c.conv_activation = {ConvActivation::Kind::Tanh, 0};
  c.dense = {10};
  c.dense_activation = StaticActivation::Tanh;
  c.learning_rate = 5e-3;
  return c;
}

ModelConfig fkan_config() {
  ModelConfig c = cnn_config();
  c.family = Family::FKAN;
  c.conv_activation = {ConvActivation::Kind::Fkan, 3};
  return c;
}

Tensor random_windows(std::size_t n, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  Tensor t({n, w, kChannels});
  for (double& v : t.data()) v = g(rng);
  return t;
}

// ---- independent scalar forward pass -----------------------------------

const Tensor& param(const Model& m, const std::string& name) {
  for (const auto& p : m.parameters())
    if (p.name == name) return p.value;
  throw std::runtime_error("no parameter " + name);
}

bool has_param(const Model& m, const std::string& name) {
  for (const auto& p : m.parameters())
    if (p.name == name) return true;
  return false;
}

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // [length][channels]

double act(StaticActivation a, double x) {
  switch (a) {
    case StaticActivation::Tanh: return std::tanh(x);
    case StaticActivation::Relu: return x > 0 ? x : 0;
    case StaticActivation::Silu: return x / (1 + std::exp(-x));
  }
  return x;
}

Vec dense(const Vec& x, const Tensor& w, const Tensor& b) {
  const std::size_t out = w.dim(1);
  Vec y(out);
  for (std::size_t o = 0; o < out; ++o) {
    double s = b[o];
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w[i * out + o];
    y[o] = s;
  }
  return y;
}

double cox_de_boor(const Vec& t, int j, int p, double x) {
  if (p == 0) return (t[j] <= x && x < t[j + 1]) ? 1.0 : 0.0;
  return (x - t[j]) / (t[j + p] - t[j]) * cox_de_boor(t, j, p - 1, x) +
         (t[j + p + 1] - x) / (t[j + p + 1] - t[j + 1]) * cox_de_boor(t, j + 1, p - 1, x);
}

double legendre(int n, double x) {
  double p0 = 1, p1 = x;
  if (n == 0) return p0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

Vec reference_logits(const Model& m, const Tensor& window) {
  const auto& c = m.config();
  const std::size_t W = static_cast<std::size_t>(c.window_size);
  Mat x(W, Vec(kChannels));
  for (std::size_t l = 0; l < W; ++l)
    for (std::size_t ch = 0; ch < kChannels; ++ch)
      x[l][ch] = (window[l * kChannels + ch] - m.normalization().mean[ch]) / m.normalization().stddev[ch];
  Vec flat;
  for (const auto& row : x) flat.insert(flat.end(), row.begin(), row.end());

  if (c.family == Family::MLP) {
    for (std::size_t l = 0; l < c.hidden.size(); ++l) {
      const std::string tag = "dense" + std::to_string(l);
      flat = dense(flat, param(m, tag + ".weight"), param(m, tag + ".bias"));
      for (double& v : flat) v = act(c.activation, v);
    }
    return dense(flat, param(m, "output.weight"), param(m, "output.bias"));
  }
  if (c.family == Family::KAN) {
    const int G = c.grid_size, k = c.spline_order;
    Vec knots;
    for (int j = -k; j <= G + k; ++j) knots.push_back(-1 + j * 2.0 / G);
    for (std::size_t l = 0; has_param(m, "kan" + std::to_string(l) + ".base"); ++l) {
      const std::string tag = "kan" + std::to_string(l);
      const Tensor& wb = param(m, tag + ".base");
      const Tensor& ws = param(m, tag + ".scale");
      const Tensor& cf = param(m, tag + ".coef");
      const std::size_t in = wb.dim(0), out = wb.dim(1), nb = cf.dim(2);
      Vec y(out, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        const double u = std::tanh(flat[i]);
        for (std::size_t o = 0; o < out; ++o) {
          double spline = 0;
          for (std::size_t j = 0; j < nb; ++j) spline += cf[(i * out + o) * nb + j] * cox_de_boor(knots, int(j), k, u);
          y[o] += wb[i * out + o] * act(StaticActivation::Silu, flat[i]) + ws[i * out + o] * spline;
        }
      }
      flat = y;
    }
    return flat;
  }
  for (std::size_t l = 0; l < c.filters.size(); ++l) {
    const std::string tag = "conv" + std::to_string(l);
    const Tensor& ker = param(m, tag + ".kernel");
    const Tensor& bias = param(m, tag + ".bias");
    const int K = int(ker.dim(0)), C = int(ker.dim(1)), F = int(ker.dim(2));
    const int L = int(x.size());
    const int pad = c.padding == Padding::Same ? (K - 1) / 2 : 0;
    const int Lout = c.padding == Padding::Same ? L : L - K + 1;
    Mat y(Lout, Vec(F));
    for (int p = 0; p < Lout; ++p)
      for (int f = 0; f < F; ++f) {
        double s = bias[f];
        for (int kk = 0; kk < K; ++kk) {
          const int src = p + kk - pad;
          if (src < 0 || src >= L) continue;
          for (int ch = 0; ch < C; ++ch) s += x[src][ch] * ker[(kk * C + ch) * F + f];
        }
        if (c.conv_activation.kind == ConvActivation::Kind::Fkan) {
          const Tensor& th = param(m, tag + ".jacobi");
          const double lam = 1 / (1 + std::exp(-param(m, tag + ".lambda")[0]));
          const double z = 2 * std::pow(1 / (1 + std::exp(-s)), lam) - 1;
          const int nd = c.conv_activation.degree + 1;
          double a = 0;
          for (int n = 0; n < nd; ++n) a += th[f * nd + n] * legendre(n, z);
          s = a;
        } else {
          s = c.conv_activation.kind == ConvActivation::Kind::Relu ? act(StaticActivation::Relu, s) : std::tanh(s);
        }
        y[p][f] = s;
      }
    const int P = c.pools[l];
    Mat pooled(Lout / P, Vec(F));
    for (int p = 0; p < Lout / P; ++p)
      for (int f = 0; f < F; ++f) {
        double best = y[p * P][f];
        for (int q = 1; q < P; ++q) best = std::max(best, y[p * P + q][f]);
        pooled[p][f] = best;
      }
    x = pooled;
  }
  flat.clear();
  if (c.global_pool) {
    flat.assign(x[0].size(), 0.0);
    for (const auto& row : x)
      for (std::size_t f = 0; f < row.size(); ++f) flat[f] += row[f] / double(x.size());
  } else {
    for (const auto& row : x) flat.insert(flat.end(), row.begin(), row.end());
  }
  for (std::size_t l = 0; l < c.dense.size(); ++l) {
    const std::string tag = "dense" + std::to_string(l);
    flat = dense(flat, param(m, tag + ".weight"), param(m, tag + ".bias"));
    for (double& v : flat) v = act(c.dense_activation, v);
  }
  return dense(flat, param(m, "output.weight"), param(m, "output.bias"));
}

Vec reference_proba(const Model& m, const Tensor& window) {
  Vec z = reference_logits(m, window);
  const double mx = std::max({z[0], z[1], z[2]});
  double s = 0;
  for (double& v : z) s += (v = std::exp(v - mx));
  for (double& v : z) v /= s;
  return z;
}

void expect_matches_reference(Model& m, std::uint64_t seed) {
  const std::size_t W = static_cast<std::size_t>(m.config().window_size);
  const Tensor batch = random_windows(4, W, seed);
  Normalization norm;
  for (std::size_t c = 0; c < kChannels; ++c) {
    norm.mean[c] = 0.1 * double(c);
    norm.stddev[c] = 1 + 0.2 * double(c);
  }
  m.set_normalization(norm);
  const Tensor p = predict_proba(m, batch);
  for (std::size_t b = 0; b < 4; ++b) {
    Tensor one({W, kChannels}, Vec(batch.data().begin() + b * W * kChannels, batch.data().begin() + (b + 1) * W * kChannels));
    const Vec ref = reference_proba(m, one);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p[b * 3 + k], ref[k], 1e-12) << to_string(m.config().family);
  }
}

// Loss of a model as a graph over its own parameters, for finite differences.
num::Graph model_loss(Model& m, const Tensor& x, const std::vector<Label>& y) {
  return [&m, &x, &y](Tape& t) {
    const auto w = weights_for(y);
    return num::add(weighted_cross_entropy(m.forward(t, x), y, w), m.penalty(t));
  };
}

std::vector<Label> cycle_labels(std::size_t n) {
  std::vector<Label> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = label_from_index(i % 3);
  return out;
}

}  // namespace

TEST(Forward, MatchesIndependentImplementation) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (ModelConfig c : {mlp_config(), kan_config(), cnn_config(), cnn_config(Padding::Valid), fkan_config()}) {
      auto m = build_model(c, seed);
      expect_matches_reference(m, seed + 10);
      c.global_pool = true;
      if (is_convolutional(c.family)) {
        auto g = build_model(c, seed);
        expect_matches_reference(g, seed + 20);
      }
    }
  }
  auto relu_cnn = cnn_config();
  relu_cnn.conv_activation = {ConvActivation::Kind::Relu, 0};
  relu_cnn.dense_activation = StaticActivation::Relu;
  auto m = build_model(relu_cnn, 4);
  expect_matches_reference(m, 4);
  auto silu_mlp = mlp_config();
  silu_mlp.activation = StaticActivation::Silu;
  auto s = build_model(silu_mlp, 5);
  expect_matches_reference(s, 5);
}

TEST(Forward, FkanWithPerturbedCoefficientsMatchesReference) {
  auto m = build_model(fkan_config(), 7);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 0.5);
  for (auto& p : m.parameters()) {
    if (p.name.find("jacobi") != std::string::npos || p.name.find("lambda") != std::string::npos) {
      for (double& v : p.value.data()) v += g(rng);
    }
  }
  expect_matches_reference(m, 8);
}

TEST(Forward, PinnedProbabilities) {
  // Regression pin: seeded MLP on a fixed ramp window.
  auto m = build_model(mlp_config(), 42);
  Tensor w({1, 10, kChannels});
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sin(0.1 * double(i));
  const Tensor p = predict_proba(m, w);
  const Vec ref = reference_proba(m, Tensor({10, kChannels}, w.values()));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(p[k], ref[k], 1e-12);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
}

TEST(Forward, SoftmaxSumsToOneAndInUnitInterval) {
  for (ModelConfig c : {mlp_config(), kan_config(), cnn_config(), fkan_config()}) {
    auto m = build_model(c, 9);
    const Tensor x = random_windows(16, std::size_t(c.window_size), 3);
    const Tensor p = predict_proba(m, x);
    for (std::size_t b = 0; b < 16; ++b) {
      EXPECT_NEAR(p[3 * b] + p[3 * b + 1] + p[3 * b + 2], 1.0, 1e-12);
      for (int k = 0; k < 3; ++k) {
        EXPECT_GT(p[3 * b + k], 0.0);
        EXPECT_LT(p[3 * b + k], 1.0);
      }
    }
  }
  EXPECT_EQ(num::softmax_rows(Tensor({1, 3}, 0.0)), Tensor({1, 3}, 1.0 / 3));
}

TEST(Forward, SingleWindowPredictAndShapeErrors) {
  auto m = build_model(mlp_config(), 1);
  const Tensor x = random_windows(1, 10, 2);
  const auto p = predict(m, x.data());
  const Tensor pb = predict_proba(m, x);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(p[k], pb[k]);
  EXPECT_THROW(predict(m, Vec(59)), ShapeError);
  EXPECT_THROW(predict_proba(m, random_windows(2, 20, 1)), ShapeError);
}

TEST(Forward, DropoutInactiveAtInference) {
  auto m = build_model(cnn_config(), 3);
  const Tensor x = random_windows(5, 20, 4);
  EXPECT_EQ(predict_proba(m, x), predict_proba(m, x));
}

TEST(Gradients, EveryFamilyPassesFiniteDifferences) {
  for (ModelConfig c : {mlp_config(), kan_config(), cnn_config(), cnn_config(Padding::Valid), fkan_config()}) {
    if (is_convolutional(c.family)) c.global_pool = c.padding == Padding::Valid;
    Model m = build_model(c, 11);
    auto& ps = m.parameters();
    // Move FKAN coefficients off their sparse initialization.
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0, 0.3);
    for (auto& p : ps)
      if (p.name.find("jacobi") != std::string::npos || p.name.find("lambda") != std::string::npos ||
          p.name.find("bias") != std::string::npos)
        for (double& v : p.value.data()) v += g(rng);
    // Keep spline coefficients clear of the L1 kink at zero.
    for (auto& p : ps)
      if (p.name.ends_with(".coef"))
        for (double& v : p.value.data())
          if (std::abs(v) < 1e-3) v += 2e-3;
    const Tensor x = random_windows(6, std::size_t(c.window_size), 13);
    const auto y = cycle_labels(6);
    auto graph = model_loss(m, x, y);
    for (auto& p : ps) {
      EXPECT_LT(num::finite_diff_check(graph, p, 1e-5), 1e-4) << to_string(c.family) << " " << p.name;
    }
  }
}

TEST(KanLayer, EdgeParameterCount) {
  // [6 -> 5 -> 3], G=5, k=3: (6*5 + 5*3) edges * (8 coefficients + w_b + w_s)
  const basis::BSplineGrid grid(-1, 1, 5, 3);
  std::size_t total = 0;
  for (auto [in, out] : {std::pair<std::size_t, std::size_t>{6, 5}, {5, 3}}) {
    total += Tensor({in, out}).size() * 2 + Tensor({in, out, grid.num_basis()}).size();
  }
  EXPECT_EQ(total, 450u);
}

TEST(KanLayer, ZeroCoefficientsGiveSiluSum) {
  const basis::BSplineGrid grid(-1, 1, 5, 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  Tensor x({4, 6});
  for (double& v : x.data()) v = u(rng);
  Tensor scale({6, 5});
  for (double& v : scale.data()) v = u(rng);
  Tape t(false);
  Var y = kan_layer(t.constant(x), t.constant(Tensor({6, 5}, 1.0)), t.constant(scale),
                    t.constant(Tensor({6, 5, 8}, 0.0)), grid);
  for (std::size_t b = 0; b < 4; ++b) {
    double s = 0;
    for (std::size_t i = 0; i < 6; ++i) s += x[b * 6 + i] / (1 + std::exp(-x[b * 6 + i]));
    for (std::size_t o = 0; o < 5; ++o) EXPECT_NEAR(y.value()[b * 5 + o], s, 1e-12);
  }
}

TEST(ModelStructure, ConvLengthsAndParameterCounts) {
  ModelConfig c = cnn_config(Padding::Valid);
  c.window_size = 30;
  c.filters = {5};
  c.kernels = {7};
  c.pools = {1};
  c.dense = {};
  EXPECT_EQ(conv_lengths(c), std::vector<int>{24});
  auto m = build_model(c, 0);
  // kernel 7*6*5 + bias 5 + output (24*5)*3 + 3
  EXPECT_EQ(m.parameter_count(), 7u * 6 * 5 + 5 + 24 * 5 * 3 + 3);

  auto mlp = build_model(mlp_config(), 0);
  EXPECT_EQ(mlp.parameter_count(), 60u * 12 + 12 + 12 * 7 + 7 + 7 * 3 + 3);
  auto kan = build_model(kan_config(), 0);
  EXPECT_EQ(kan.parameter_count(), (60u * 5 + 5 * 3) * (8 + 2));
  auto fk = build_model(fkan_config(), 0);
  auto cn = build_model(cnn_config(), 0);
  EXPECT_EQ(fk.parameter_count(), cn.parameter_count() + 6 * 4 + 1 + 5 * 4 + 1);
}

TEST(ModelStructure, InitializationRanges) {
  auto m = build_model(kan_config(), 5);
  for (const auto& p : m.parameters()) {
    if (p.name.ends_with(".scale")) {
      for (double v : p.value.data()) EXPECT_EQ(v, 1.0);
    }
  }
  auto c = build_model(cnn_config(), 5);
  for (const auto& p : c.parameters()) {
    if (p.name == "conv0.kernel") {
      const double lim = std::sqrt(6.0 / (7 * 6 + 7 * 6));
      for (double v : p.value.data()) EXPECT_LE(std::abs(v), lim);
    }
    if (p.name.ends_with(".bias")) {
      for (double v : p.value.data()) EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(Config, ValidationNamesTheField) {
  auto expect_field = [](ModelConfig c, const std::string& field) {
    try {
      validate(c);
      ADD_FAILURE() << "expected ConfigError for " << field;
    } catch (const ConfigError& e) {
      EXPECT_EQ(std::string(e.what()).rfind(field + ":", 0), 0u) << e.what();
    }
  };
  auto c = mlp_config();
  c.window_size = 15;
  expect_field(c, "window_size");
  c = mlp_config();
  c.hidden = {4};
  expect_field(c, "hidden");
  c.hidden = {10, 10, 10, 10, 10, 10};
  expect_field(c, "hidden");
  c = mlp_config();
  c.regularization = 0.5;
  expect_field(c, "regularization");
  c = kan_config();
  c.grid_size = 16;
  expect_field(c, "grid");
  c = cnn_config();
  c.kernels = {6, 7};
  expect_field(c, "kernels");
  c = cnn_config();
  c.dropout = 0.1;
  expect_field(c, "dropout");
  c = cnn_config();
  c.conv_activation = {ConvActivation::Kind::Fkan, 2};
  expect_field(c, "conv_activation");
  c = fkan_config();
  c.conv_activation = {ConvActivation::Kind::Fkan, 7};
  expect_field(c, "conv_activation");
  c = cnn_config(Padding::Valid);
  c.window_size = 10;
  c.kernels = {9, 9};
  expect_field(c, "kernels");
  c = cnn_config();
  c.dense = {600};
  expect_field(c, "dense");
  EXPECT_THROW(build_model(c, 0), ConfigError);
}

TEST(Config, KeyValueRoundTrip) {
  for (ModelConfig c : {mlp_config(), kan_config(), cnn_config(), fkan_config()}) {
    EXPECT_EQ(from_kv(to_kv(c)), c);
  }
  kv::Map bad{{"family", "MLP"}, {"bogus", "1"}};
  EXPECT_THROW(from_kv(bad), ConfigError);
  EXPECT_THROW(parse_conv_activation("fkanx"), ConfigError);
}

TEST(Loss, WeightedCrossEntropyCases) {
  const std::vector<Label> y{Label::SW, Label::ST};
  Tape t(false);
  Var z = t.constant(Tensor({2, 3}, {1, 0, 0, 0, 1, 0}));
  const std::vector<std::uint64_t> counts{4, 1, 2};
  auto w = metrics::class_weights(counts, 3);
  w.weights = {0.5, 2, 1};
  EXPECT_NEAR(weighted_cross_entropy(z, y, w).value().item(), 0.68930, 1e-4);

  // Uniform weights reduce to plain cross-entropy.
  const auto u = metrics::uniform_weights(3);
  const double ce = -(std::log(std::exp(1.0) / (std::exp(1.0) + 2)));
  EXPECT_NEAR(weighted_cross_entropy(z, y, u).value().item(), ce, 1e-14);

  // Large logit gap drives the loss to zero.
  Var sharp = t.constant(Tensor({2, 3}, {60, 0, 0, 0, 60, 0}));
  EXPECT_LT(weighted_cross_entropy(sharp, y, u).value().item(), 1e-20);
}

TEST(Training, SeparableToyDataConverges) {
  // Two informative channels; classes separated by their mean.
  const std::size_t per = 20, W = 10;
  Tensor x({3 * per, W, kChannels});
  std::vector<Label> y;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0, 0.3);
  for (std::size_t n = 0; n < 3 * per; ++n) {
    const int k = int(n % 3);
    y.push_back(label_from_index(std::size_t(k)));
    for (std::size_t l = 0; l < W; ++l)
      for (std::size_t c = 0; c < kChannels; ++c) {
        double v = noise(rng);
        if (c == 0) v += 2.0 * (k - 1);
        if (c == 1) v += k == 1 ? 2.0 : -1.0;
        x[(n * W + l) * kChannels + c] = v;
      }
  }
  auto c = mlp_config();
  c.learning_rate = 1e-2;
  auto trained = train(build_model(c, 1), {x, y}, weights_for(y), {.seed = 1});
  ASSERT_EQ(trained.history().size(), 50u);
  EXPECT_LT(trained.history().back(), 0.1 * trained.history().front());
  EXPECT_EQ(metrics::macro_f1(y, predict_labels(trained, x)), 1.0);
}

TEST(Training, ZeroLearningRateKeepsParameters) {
  const Tensor x = random_windows(9, 10, 1);
  const auto y = cycle_labels(9);
  auto m = build_model(mlp_config(), 2);
  auto trained = train(m, {x, y}, weights_for(y), {.seed = 0, .learning_rate = 0.0, .epochs = 5});
  for (std::size_t i = 0; i < m.parameters().size(); ++i) EXPECT_EQ(trained.parameters()[i].value, m.parameters()[i].value);
  for (double h : trained.history()) EXPECT_EQ(h, trained.history().front());
}

TEST(Training, DeterministicForEveryFamily) {
  for (ModelConfig c : {mlp_config(), kan_config(), cnn_config(), fkan_config()}) {
    c.epochs = 4;
    const Tensor x = random_windows(9, std::size_t(c.window_size), 5);
    const auto y = cycle_labels(9);
    auto a = train(build_model(c, 3), {x, y}, weights_for(y), {.seed = 8});
    auto b = train(build_model(c, 3), {x, y}, weights_for(y), {.seed = 8});
    for (std::size_t i = 0; i < a.parameters().size(); ++i) EXPECT_EQ(a.parameters()[i].value, b.parameters()[i].value);
    EXPECT_EQ(a.history(), b.history());
    EXPECT_EQ(a.history().size(), 4u);
  }
}

TEST(Training, RequiresEveryClass) {
  const Tensor x = random_windows(4, 10, 1);
  const std::vector<Label> y{Label::SW, Label::SW, Label::ST, Label::ST};
  EXPECT_THROW(train(build_model(mlp_config(), 0), {x, y}, metrics::uniform_weights(3)), DataError);
}

TEST(Training, NonFiniteLossReportsEpoch) {
  Tensor x = random_windows(3, 10, 1);
  const auto y = cycle_labels(3);
  auto c = mlp_config();
  auto m = build_model(c, 0);
  m.parameters()[0].value[0] = std::numeric_limits<double>::infinity();
  try {
    train(m, {x, y}, weights_for(y), {.seed = 0, .fit_normalization = true});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos) << e.what();
  }
}

TEST(Serialization, RoundTripIsBitExact) {
  const auto dir = std::filesystem::temp_directory_path() / "turnkan_model_test";
  std::filesystem::create_directories(dir);
  for (ModelConfig c : {mlp_config(), kan_config(), cnn_config(), fkan_config()}) {
    c.epochs = 3;
    const Tensor x = random_windows(9, std::size_t(c.window_size), 6);
    const auto y = cycle_labels(9);
    auto m = train(build_model(c, 4), {x, y}, weights_for(y), {.seed = 1});
    const auto path = dir / (std::string(to_string(c.family)) + ".json");
    save_model(m, path);
    auto r = load_model(path);
    EXPECT_EQ(r.config(), m.config());
    EXPECT_EQ(r.normalization(), m.normalization());
    EXPECT_EQ(r.history(), m.history());
    EXPECT_EQ(predict_proba(r, x), predict_proba(m, x));
  }
  EXPECT_THROW(load_model(dir / "missing.json"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Benchmark, PositiveAndStable) {
  auto m = build_model(mlp_config(), 0);
  const Tensor x = random_windows(8, 10, 0);
  const double a = benchmark_inference(m, x, 30);
  const double b = benchmark_inference(m, x, 30);
  EXPECT_GT(a, 0.0);
  EXPECT_LT(std::max(a, b) / std::min(a, b), 3.0);
  EXPECT_THROW(benchmark_inference(m, x, 29), ConfigError);
}
