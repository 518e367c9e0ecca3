#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "turnkan/labels.hpp"
#include "turnkan/models/config.hpp"
#include "turnkan/models/layers.hpp"
#include "turnkan/numcore/ops.hpp"

namespace turnkan::models {

using num::Parameter;

// Windows stacked as inputs[N, W, 6] with one label each.
struct WindowBatch {
  Tensor inputs;
  std::vector<Label> labels;

  std::size_t size() const { return labels.size(); }
};

// Per-channel standardization fitted on training windows.
struct Normalization {
  std::array<double, kChannels> mean{};
  std::array<double, kChannels> stddev{1, 1, 1, 1, 1, 1};

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

inline Normalization fit_normalization(const Tensor& inputs) {
  num::detail::require(inputs.rank() == 3 && inputs.dim(2) == kChannels, "fit_normalization",
                       "inputs " + num::shape_string(inputs.shape()));
  Normalization n;
  const std::size_t rows = inputs.size() / kChannels;
  std::array<double, kChannels> sum{}, sq{};
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < kChannels; ++c) sum[c] += inputs[r * kChannels + c];
  for (std::size_t c = 0; c < kChannels; ++c) n.mean[c] = sum[c] / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < kChannels; ++c) {
      const double d = inputs[r * kChannels + c] - n.mean[c];
      sq[c] += d * d;
    }
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double sd = std::sqrt(sq[c] / static_cast<double>(rows));
    n.stddev[c] = sd > 1e-12 ? sd : 1.0;
  }
  return n;
}

// A classifier: configuration, learnable parameters, input standardization and
// training history. Parameters are stored flat in construction order.
class Model {
 public:
  Model() = default;

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  const Normalization& normalization() const { return norm_; }
  void set_normalization(const Normalization& n) { norm_ = n; }
  std::vector<double>& history() { return history_; }
  const std::vector<double>& history() const { return history_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  // Logits [B, 3] for inputs [B, W, 6]. Dropout is applied only when rng is given.
  Var forward(num::Tape& tape, const Tensor& inputs, std::mt19937_64* rng = nullptr);

  // Regularization term added to the training loss (L2 for MLP, L1 on spline coefficients for KAN).
  Var penalty(num::Tape& tape);

  friend Model build_model(const ModelConfig& config, std::uint64_t seed);
  friend Model assemble_model(const ModelConfig& config, std::vector<Parameter> params);

 private:
  struct Dense { std::size_t weight, bias; };
  struct Kan { std::size_t base, scale, coef; };
  struct Conv { std::size_t kernel, bias, jacobi = 0, lambda = 0; };

  void layout(std::uint64_t seed, bool initialize);
  std::size_t add_param(std::string name, num::Shape shape);
  Var dense_forward(num::Tape& t, Var h, const Dense& d);
  Var activate(Var h, StaticActivation a);

  ModelConfig config_;
  std::vector<Parameter> params_;
  Normalization norm_;
  std::vector<double> history_;
  std::vector<Dense> dense_;
  std::vector<Kan> kan_;
  std::vector<Conv> conv_;
  std::mt19937_64 init_rng_;
  bool initialize_ = true;
};

inline std::size_t Model::add_param(std::string name, num::Shape shape) {
  params_.emplace_back(std::move(name), Tensor(std::move(shape), 0.0));
  return params_.size() - 1;
}

// Structure of the network; `initialize` draws initial values, otherwise values stay zero.
inline void Model::layout(std::uint64_t seed, bool initialize) {
  init_rng_.seed(seed);
  initialize_ = initialize;
  params_.clear();
  dense_.clear();
  kan_.clear();
  conv_.clear();
  const auto& c = config_;

  auto glorot = [&](Parameter& p, double fan_in, double fan_out) {
    if (!initialize_) return;
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-lim, lim);
    for (double& v : p.value.data()) v = u(init_rng_);
  };
  auto add_dense = [&](std::size_t in, std::size_t out, const std::string& tag) {
    Dense d{add_param(tag + ".weight", {in, out}), 0};
    d.bias = add_param(tag + ".bias", {out});
    glorot(params_[d.weight], static_cast<double>(in), static_cast<double>(out));
    dense_.push_back(d);
  };

  const std::size_t flat = static_cast<std::size_t>(c.window_size) * kChannels;
  if (c.family == Family::MLP) {
    std::size_t in = flat;
    for (std::size_t l = 0; l < c.hidden.size(); ++l) {
      add_dense(in, static_cast<std::size_t>(c.hidden[l]), "dense" + std::to_string(l));
      in = static_cast<std::size_t>(c.hidden[l]);
    }
    add_dense(in, kNumClasses, "output");
    return;
  }
  if (c.family == Family::KAN) {
    const basis::BSplineGrid grid(-1, 1, c.grid_size, c.spline_order);
    std::vector<std::size_t> widths{flat};
    for (int h : c.hidden) widths.push_back(static_cast<std::size_t>(h));
    widths.push_back(kNumClasses);
    std::normal_distribution<double> coef_init(0.0, 0.1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const std::size_t in = widths[l], out = widths[l + 1];
      const std::string tag = "kan" + std::to_string(l);
      Kan k{add_param(tag + ".base", {in, out}), 0, 0};
      k.scale = add_param(tag + ".scale", {in, out});
      k.coef = add_param(tag + ".coef", {in, out, grid.num_basis()});
      if (initialize_) {
        glorot(params_[k.base], static_cast<double>(in), static_cast<double>(out));
        params_[k.scale].value.fill(1.0);
        for (double& v : params_[k.coef].value.data()) v = coef_init(init_rng_);
      }
      kan_.push_back(k);
    }
    return;
  }
  // CNN / FKAN
  std::size_t channels = kChannels;
  const auto lens = conv_lengths(c);
  for (std::size_t l = 0; l < c.filters.size(); ++l) {
    const std::size_t K = static_cast<std::size_t>(c.kernels[l]), F = static_cast<std::size_t>(c.filters[l]);
    const std::string tag = "conv" + std::to_string(l);
    Conv cv{add_param(tag + ".kernel", {K, channels, F}), 0};
    cv.bias = add_param(tag + ".bias", {F});
    glorot(params_[cv.kernel], static_cast<double>(K * channels), static_cast<double>(K * F));
    if (c.conv_activation.kind == ConvActivation::Kind::Fkan) {
      const std::size_t nd = static_cast<std::size_t>(c.conv_activation.degree) + 1;
      cv.jacobi = add_param(tag + ".jacobi", {F, nd});
      cv.lambda = add_param(tag + ".lambda", {1});
      if (initialize_) {
        // Starts as P_1(z) = z, a shifted sigmoid^0.5; lambda_raw = 0 gives lambda = 0.5.
        for (std::size_t f = 0; f < F; ++f) params_[cv.jacobi].value[f * nd + 1] = 1.0;
      }
    }
    conv_.push_back(cv);
    channels = F;
  }
  std::size_t in = c.global_pool ? channels : channels * static_cast<std::size_t>(lens.back());
  for (std::size_t l = 0; l < c.dense.size(); ++l) {
    add_dense(in, static_cast<std::size_t>(c.dense[l]), "dense" + std::to_string(l));
    in = static_cast<std::size_t>(c.dense[l]);
  }
  add_dense(in, kNumClasses, "output");
}

inline Var Model::activate(Var h, StaticActivation a) {
  switch (a) {
    case StaticActivation::Tanh: return num::tanh(h);
    case StaticActivation::Relu: return num::relu(h);
    case StaticActivation::Silu: return num::silu(h);
  }
  return h;
}

inline Var Model::dense_forward(num::Tape& t, Var h, const Dense& d) {
  return num::add_bias(num::matmul(h, t.param(params_[d.weight])), t.param(params_[d.bias]));
}

inline Var Model::forward(num::Tape& t, const Tensor& inputs, std::mt19937_64* rng) {
  const auto& c = config_;
  const std::size_t W = static_cast<std::size_t>(c.window_size);
  if (inputs.rank() != 3 || inputs.dim(1) != W || inputs.dim(2) != kChannels) {
    throw ShapeError("predict: expected inputs [N," + std::to_string(W) + ",6], got " +
                     num::shape_string(inputs.shape()));
  }
  const std::size_t B = inputs.dim(0);
  Tensor x = inputs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t ch = i % kChannels;
    x[i] = (x[i] - norm_.mean[ch]) / norm_.stddev[ch];
  }
  Var h = t.constant(std::move(x));

  if (c.family == Family::MLP) {
    h = num::reshape(h, {B, W * kChannels});
    for (std::size_t l = 0; l + 1 < dense_.size(); ++l) h = activate(dense_forward(t, h, dense_[l]), c.activation);
    return dense_forward(t, h, dense_.back());
  }
  if (c.family == Family::KAN) {
    const basis::BSplineGrid grid(-1, 1, c.grid_size, c.spline_order);
    h = num::reshape(h, {B, W * kChannels});
    for (const Kan& k : kan_) {
      h = kan_layer(h, t.param(params_[k.base]), t.param(params_[k.scale]), t.param(params_[k.coef]), grid);
    }
    return h;
  }
  for (std::size_t l = 0; l < conv_.size(); ++l) {
    const Conv& cv = conv_[l];
    h = num::conv1d(h, t.param(params_[cv.kernel]), t.param(params_[cv.bias]), c.padding);
    switch (c.conv_activation.kind) {
      case ConvActivation::Kind::Relu: h = num::relu(h); break;
      case ConvActivation::Kind::Tanh: h = num::tanh(h); break;
      case ConvActivation::Kind::Fkan:
        h = fkan_activation(h, t.param(params_[cv.jacobi]), t.param(params_[cv.lambda]), c.conv_activation.degree);
        break;
    }
    h = num::maxpool1d(h, static_cast<std::size_t>(c.pools[l]));
  }
  if (c.global_pool) {
    h = num::global_avg_pool(h);
  } else {
    const auto& s = h.shape();
    h = num::reshape(h, {s[0], s[1] * s[2]});
  }
  if (rng) h = num::dropout(h, c.dropout, *rng);
  for (std::size_t l = 0; l + 1 < dense_.size(); ++l) {
    h = activate(dense_forward(t, h, dense_[l]), c.dense_activation);
    if (rng) h = num::dropout(h, c.dropout, *rng);
  }
  return dense_forward(t, h, dense_.back());
}

inline Var Model::penalty(num::Tape& t) {
  const auto& c = config_;
  Var total = t.constant(Tensor::scalar(0.0));
  if (c.family == Family::MLP) {
    for (const Dense& d : dense_) total = num::add(total, num::sum_squares(t.param(params_[d.weight])));
    return num::scale(total, c.regularization);
  }
  if (c.family == Family::KAN) {
    for (const Kan& k : kan_) total = num::add(total, num::sum_abs(t.param(params_[k.coef])));
    return num::scale(total, c.regularization);
  }
  return total;
}

inline Model build_model(const ModelConfig& config, std::uint64_t seed) {
  validate(config);
  Model m;
  m.config_ = config;
  m.layout(seed, true);
  return m;
}

// Rebuilds the network structure for config and installs the given parameter values.
inline Model assemble_model(const ModelConfig& config, std::vector<Parameter> params) {
  validate(config);
  Model m;
  m.config_ = config;
  m.layout(0, false);
  if (params.size() != m.params_.size()) {
    throw DataError("model: expected " + std::to_string(m.params_.size()) + " parameter tensors, got " +
                    std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].value.shape() != m.params_[i].value.shape()) {
      throw DataError("model: parameter '" + m.params_[i].name + "' expects shape " +
                      num::shape_string(m.params_[i].value.shape()) + ", got " +
                      num::shape_string(params[i].value.shape()));
    }
    m.params_[i].value = std::move(params[i].value);
  }
  return m;
}

// Class probabilities [N, 3] in label order (SW, ST, SP); dropout inactive.
inline Tensor predict_proba(Model& model, const Tensor& inputs) {
  num::Tape tape(false);
  return num::softmax_rows(model.forward(tape, inputs).value());
}

inline std::vector<Label> predict_labels(Model& model, const Tensor& inputs) {
  const Tensor p = predict_proba(model, inputs);
  std::vector<Label> out(p.dim(0));
  for (std::size_t b = 0; b < out.size(); ++b) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c)
      if (p[b * kNumClasses + c] > p[b * kNumClasses + best]) best = c;
    out[b] = label_from_index(best);
  }
  return out;
}

// Probabilities for a single window given as W x 6 row-major samples.
inline std::array<double, kNumClasses> predict(Model& model, std::span<const double> window) {
  const std::size_t W = static_cast<std::size_t>(model.config().window_size);
  if (window.size() != W * kChannels) {
    throw ShapeError("predict: window has " + std::to_string(window.size()) + " values, expected " +
                     std::to_string(W * kChannels));
  }
  const Tensor p = predict_proba(model, Tensor({1, W, kChannels}, std::vector<double>(window.begin(), window.end())));
  return {p[0], p[1], p[2]};
}

}  // namespace turnkan::models
