#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "turnkan/basis/activation.hpp"
#include "turnkan/errors.hpp"
#include "turnkan/kv.hpp"
#include "turnkan/numcore/ops.hpp"

namespace turnkan::models {

using basis::StaticActivation;
using num::Padding;

enum class Family { MLP, KAN, CNN, FKAN };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::MLP: return "MLP";
    case Family::KAN: return "KAN";
    case Family::CNN: return "CNN";
    case Family::FKAN: return "FKAN";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "MLP" || s == "mlp") return Family::MLP;
  if (s == "KAN" || s == "kan") return Family::KAN;
  if (s == "CNN" || s == "cnn") return Family::CNN;
  if (s == "FKAN" || s == "fkan") return Family::FKAN;
  throw ConfigError("family: unknown model family '" + std::string(s) + "'");
}

inline bool is_convolutional(Family f) { return f == Family::CNN || f == Family::FKAN; }

inline std::string_view to_string(Padding p) { return p == Padding::Same ? "same" : "valid"; }

inline Padding parse_padding(std::string_view s) {
  if (s == "same") return Padding::Same;
  if (s == "valid") return Padding::Valid;
  throw ConfigError("padding: expected 'valid' or 'same', got '" + std::string(s) + "'");
}

// Activation after each convolution: a static function or a fractional-Jacobi block of given degree.
struct ConvActivation {
  enum class Kind { Relu, Tanh, Fkan } kind = Kind::Relu;
  int degree = 0;

  friend bool operator==(const ConvActivation&, const ConvActivation&) = default;
};

inline std::string to_string(const ConvActivation& a) {
  switch (a.kind) {
    case ConvActivation::Kind::Relu: return "relu";
    case ConvActivation::Kind::Tanh: return "tanh";
    case ConvActivation::Kind::Fkan: return "fkan" + std::to_string(a.degree);
  }
  return "?";
}

inline ConvActivation parse_conv_activation(std::string_view s) {
  if (s == "relu") return {ConvActivation::Kind::Relu, 0};
  if (s == "tanh") return {ConvActivation::Kind::Tanh, 0};
  if (s.size() == 5 && s.substr(0, 4) == "fkan" && s[4] >= '0' && s[4] <= '9') {
    return {ConvActivation::Kind::Fkan, s[4] - '0'};
  }
  throw ConfigError("conv_activation: expected relu, tanh or fkan<d>, got '" + std::string(s) + "'");
}

inline constexpr std::size_t kChannels = 6;

// Architecture and hyperparameters of one classifier. Ranges follow the two
// architecture-search tables (MLP/KAN and CNN/FKAN).
struct ModelConfig {
  Family family = Family::MLP;
  int window_size = 20;
  int epochs = 50;
  double learning_rate = 1e-3;

  // MLP / KAN
  std::vector<int> hidden{32};
  StaticActivation activation = StaticActivation::Tanh;
  double regularization = 1e-4;
  int spline_order = 3;
  int grid_size = 5;

  // CNN / FKAN
  std::vector<int> filters{16};
  std::vector<int> kernels{7};
  std::vector<int> pools{2};
  Padding padding = Padding::Same;
  ConvActivation conv_activation{};
  double dropout = 0.2;
  bool global_pool = false;
  std::vector<int> dense{};
  StaticActivation dense_activation = StaticActivation::Relu;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

namespace detail {

inline void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

inline void check_range(double v, double lo, double hi, const std::string& field) {
  check(v >= lo && v <= hi, field,
        "value " + kv::format_double(v) + " outside [" + kv::format_double(lo) + ", " + kv::format_double(hi) + "]");
}

}  // namespace detail

// Length of the feature axis after each convolution block (conv then pool).
inline std::vector<int> conv_lengths(const ModelConfig& c) {
  std::vector<int> out;
  int len = c.window_size;
  for (std::size_t i = 0; i < c.filters.size(); ++i) {
    if (c.padding == Padding::Valid) len = len - c.kernels[i] + 1;
    if (len < 1) return out;
    len = len / c.pools[i];
    out.push_back(len);
    if (len < 1) return out;
  }
  return out;
}

inline void validate(const ModelConfig& c) {
  using detail::check;
  using detail::check_range;
  check(c.window_size == 10 || c.window_size == 20 || c.window_size == 30, "window_size",
        "must be 10, 20 or 30, got " + std::to_string(c.window_size));
  check(c.epochs >= 1, "epochs", "must be >= 1");
  if (!is_convolutional(c.family)) {
    check(!c.hidden.empty() && c.hidden.size() <= 5, "hidden", "between 1 and 5 hidden layers required");
    for (int w : c.hidden) check_range(w, 5, 100, "hidden");
    check_range(c.regularization, 1e-5, 1e-1, "regularization");
    check_range(c.learning_rate, 1e-4, 1e-2, "learning_rate");
    if (c.family == Family::KAN) {
      check_range(c.spline_order, 1, 5, "k");
      check_range(c.grid_size, 1, 15, "grid");
    }
    return;
  }
  check(!c.filters.empty() && c.filters.size() <= 6, "filters", "between 1 and 6 convolution layers required");
  check(c.kernels.size() == c.filters.size(), "kernels", "one kernel size per convolution layer");
  check(c.pools.size() == c.filters.size(), "pools", "one pool size per convolution layer");
  for (int f : c.filters) check_range(f, 5, 200, "filters");
  for (int k : c.kernels) check_range(k, 7, 15, "kernels");
  for (int p : c.pools) check_range(p, 1, 3, "pools");
  if (c.family == Family::CNN) {
    check(c.conv_activation.kind != ConvActivation::Kind::Fkan, "conv_activation", "CNN uses relu or tanh");
  } else {
    check(c.conv_activation.kind == ConvActivation::Kind::Fkan, "conv_activation", "FKAN uses fkan<d>");
  }
  if (c.conv_activation.kind == ConvActivation::Kind::Fkan) check_range(c.conv_activation.degree, 1, 6, "conv_activation");
  check_range(c.dropout, 0.2, 0.8, "dropout");
  check(c.dense.size() <= 3, "dense", "at most 3 classifier layers");
  for (int d : c.dense) check_range(d, 10, 500, "dense");
  check(c.dense_activation != StaticActivation::Silu, "dense_activation", "classifier uses relu or tanh");
  check_range(c.learning_rate, 1e-4, 1e-2, "learning_rate");
  const auto lens = conv_lengths(c);
  check(lens.size() == c.filters.size() && lens.back() >= 1, "kernels",
        "feature length collapses below 1 for window " + std::to_string(c.window_size));
}

inline kv::Map to_kv(const ModelConfig& c) {
  kv::Map m;
  m["family"] = std::string(to_string(c.family));
  m["window"] = std::to_string(c.window_size);
  m["epochs"] = std::to_string(c.epochs);
  m["learning_rate"] = kv::format_double(c.learning_rate);
  if (!is_convolutional(c.family)) {
    m["hidden"] = kv::join(c.hidden);
    m["regularization"] = kv::format_double(c.regularization);
    if (c.family == Family::MLP) m["activation"] = std::string(basis::to_string(c.activation));
    if (c.family == Family::KAN) {
      m["k"] = std::to_string(c.spline_order);
      m["grid"] = std::to_string(c.grid_size);
    }
  } else {
    m["filters"] = kv::join(c.filters);
    m["kernels"] = kv::join(c.kernels);
    m["pools"] = kv::join(c.pools);
    m["padding"] = std::string(to_string(c.padding));
    m["conv_activation"] = to_string(c.conv_activation);
    m["dropout"] = kv::format_double(c.dropout);
    m["global_pool"] = c.global_pool ? "true" : "false";
    m["dense"] = kv::join(c.dense);
    m["dense_activation"] = std::string(basis::to_string(c.dense_activation));
  }
  return m;
}

// Applies the keys present in m on top of base; unknown keys are rejected.
inline ModelConfig apply_kv(ModelConfig c, const kv::Map& m) {
  for (const auto& [k, v] : m) {
    if (k == "family") c.family = parse_family(v);
    else if (k == "window") c.window_size = static_cast<int>(kv::to_int(k, v));
    else if (k == "epochs") c.epochs = static_cast<int>(kv::to_int(k, v));
    else if (k == "learning_rate") c.learning_rate = kv::to_double(k, v);
    else if (k == "hidden") c.hidden = kv::to_int_list(k, v);
    else if (k == "regularization") c.regularization = kv::to_double(k, v);
    else if (k == "activation") c.activation = basis::parse_static_activation(v);
    else if (k == "k") c.spline_order = static_cast<int>(kv::to_int(k, v));
    else if (k == "grid") c.grid_size = static_cast<int>(kv::to_int(k, v));
    else if (k == "filters") c.filters = kv::to_int_list(k, v);
    else if (k == "kernels") c.kernels = kv::to_int_list(k, v);
    else if (k == "pools") c.pools = kv::to_int_list(k, v);
    else if (k == "padding") c.padding = parse_padding(v);
    else if (k == "conv_activation") c.conv_activation = parse_conv_activation(v);
    else if (k == "dropout") c.dropout = kv::to_double(k, v);
    else if (k == "global_pool") c.global_pool = kv::to_bool(k, v);
    else if (k == "dense") c.dense = kv::to_int_list(k, v);
    else if (k == "dense_activation") c.dense_activation = basis::parse_static_activation(v);
    else throw ConfigError(k + ": unknown model key");
  }
  return c;
}

inline ModelConfig from_kv(const kv::Map& m) {
  auto it = m.find("family");
  if (it == m.end()) throw ConfigError("family: missing");
  ModelConfig c;
  c.family = parse_family(it->second);
  return apply_kv(c, m);
}

}  // namespace turnkan::models
