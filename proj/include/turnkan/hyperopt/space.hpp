#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "turnkan/errors.hpp"
#include "turnkan/kv.hpp"
#include "turnkan/models/config.hpp"
#include "turnkan/random.hpp"

namespace turnkan::hopt {

struct Dimension {
  enum class Kind { Integer, Real, Categorical } kind = Kind::Integer;
  std::string name;
  double lo = 0, hi = 0;
  bool log = false;
  std::vector<std::string> categories;
  // Conditional dimension: active only while dimension `depends_on` is >= `rank`.
  std::string depends_on;
  int rank = 0;

  std::size_t width() const { return kind == Kind::Categorical ? categories.size() : 1; }
};

// One value per dimension in native units; categoricals hold the category index.
struct Assignment {
  std::vector<double> values;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

class SearchSpace {
 public:
  SearchSpace(std::string name, models::Family family, std::vector<Dimension> dims)
      : name_(std::move(name)), family_(family), dims_(std::move(dims)) {
    for (const auto& d : dims_) {
      if (d.kind == Dimension::Kind::Categorical && d.categories.empty()) {
        throw ConfigError(d.name + ": categorical dimension without categories");
      }
      if (d.kind != Dimension::Kind::Categorical && !(d.lo <= d.hi)) throw ConfigError(d.name + ": empty range");
      if (d.log && !(d.lo > 0)) throw ConfigError(d.name + ": log-scaled range must be positive");
      if (!d.depends_on.empty()) index(d.depends_on);
    }
  }

  const std::string& name() const { return name_; }
  models::Family family() const { return family_; }
  const std::vector<Dimension>& dims() const { return dims_; }

  std::size_t index(const std::string& name) const {
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (dims_[i].name == name) return i;
    throw ConfigError(name + ": no such search dimension in space " + name_);
  }
  bool has(const std::string& name) const {
    return std::any_of(dims_.begin(), dims_.end(), [&](const Dimension& d) { return d.name == name; });
  }

  std::size_t encoded_size() const {
    std::size_t n = 0;
    for (const auto& d : dims_) n += d.width();
    return n;
  }

  double value(const Assignment& a, const std::string& name) const { return a.values.at(index(name)); }
  int integer(const Assignment& a, const std::string& name) const { return static_cast<int>(value(a, name)); }
  const std::string& category(const Assignment& a, const std::string& name) const {
    const auto i = index(name);
    return dims_[i].categories.at(static_cast<std::size_t>(a.values.at(i)));
  }

  bool active(const Assignment& a, std::size_t i) const {
    const auto& d = dims_[i];
    return d.depends_on.empty() || a.values.at(index(d.depends_on)) >= d.rank;
  }

  // Integers map to their own value, log dimensions to log10, categoricals to one-hot.
  std::vector<double> encode(const Assignment& a) const {
    check_size(a);
    std::vector<double> p;
    p.reserve(encoded_size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      const auto& d = dims_[i];
      const double v = a.values[i];
      if (d.kind == Dimension::Kind::Categorical) {
        for (std::size_t c = 0; c < d.width(); ++c) p.push_back(c == static_cast<std::size_t>(v) ? 1.0 : 0.0);
      } else {
        p.push_back(d.log ? std::log10(v) : v);
      }
    }
    return p;
  }

  // Inverse of encode. Out-of-bounds coordinates are clipped to the bounds, integers
  // are rounded and a categorical takes the largest one-hot entry.
  Assignment decode(std::span<const double> p) const {
    if (p.size() != encoded_size()) {
      throw ConfigError("point: expected " + std::to_string(encoded_size()) + " coordinates, got " + std::to_string(p.size()));
    }
    Assignment a;
    std::size_t at = 0;
    for (const auto& d : dims_) {
      if (d.kind == Dimension::Kind::Categorical) {
        const auto first = p.begin() + static_cast<long>(at);
        a.values.push_back(static_cast<double>(std::max_element(first, first + static_cast<long>(d.width())) - first));
      } else {
        double c = p[at];
        if (std::isnan(c)) throw ConfigError(d.name + ": coordinate is NaN");
        if (d.log) {
          c = std::clamp(c, std::log10(d.lo), std::log10(d.hi));
          a.values.push_back(std::clamp(std::pow(10.0, c), d.lo, d.hi));
        } else if (d.kind == Dimension::Kind::Integer) {
          a.values.push_back(std::clamp(std::round(c), d.lo, d.hi));
        } else {
          a.values.push_back(std::clamp(c, d.lo, d.hi));
        }
      }
      at += d.width();
    }
    return a;
  }

  // Encoded point rescaled to the unit cube (surrogate inputs).
  std::vector<double> unit(const Assignment& a) const {
    auto p = encode(a);
    std::size_t at = 0;
    for (const auto& d : dims_) {
      if (d.kind != Dimension::Kind::Categorical) {
        const double lo = d.log ? std::log10(d.lo) : d.lo, hi = d.log ? std::log10(d.hi) : d.hi;
        p[at] = hi > lo ? (p[at] - lo) / (hi - lo) : 0.0;
      }
      at += d.width();
    }
    return p;
  }

  // Inactive conditional dimensions reset to their lowest value, so assignments
  // that describe the same model coincide.
  Assignment canonical(Assignment a) const {
    check_size(a);
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (!active(a, i)) a.values[i] = dims_[i].kind == Dimension::Kind::Categorical ? 0.0 : dims_[i].lo;
    }
    return a;
  }

  // Draws a single dimension uniformly (log-uniform for log dimensions) from u in [0, 1).
  double draw(std::size_t i, double u) const {
    const auto& d = dims_[i];
    switch (d.kind) {
      case Dimension::Kind::Categorical:
        return std::min(std::floor(u * static_cast<double>(d.width())), static_cast<double>(d.width() - 1));
      case Dimension::Kind::Integer:
        return std::min(d.lo + std::floor(u * (d.hi - d.lo + 1)), d.hi);
      case Dimension::Kind::Real:
        if (d.log) return std::clamp(std::pow(10.0, std::log10(d.lo) + u * (std::log10(d.hi) - std::log10(d.lo))), d.lo, d.hi);
        return d.lo + u * (d.hi - d.lo);
    }
    return d.lo;
  }

  Assignment lowest() const {
    Assignment a;
    for (const auto& d : dims_) a.values.push_back(d.kind == Dimension::Kind::Categorical ? 0.0 : d.lo);
    return a;
  }

  Assignment sample(rnd::Engine& g) const {
    Assignment a;
    for (std::size_t i = 0; i < dims_.size(); ++i) a.values.push_back(draw(i, rnd::uniform01(g)));
    return a;
  }

  // Latin hypercube design of n assignments: every dimension sees each of n strata once.
  std::vector<Assignment> latin_hypercube(std::size_t n, rnd::Engine& g) const {
    std::vector<Assignment> out(n);
    std::vector<std::size_t> strata(n);
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      for (std::size_t s = 0; s < n; ++s) strata[s] = s;
      rnd::shuffle(strata, g);
      for (std::size_t r = 0; r < n; ++r) {
        const double u = (static_cast<double>(strata[r]) + rnd::uniform01(g)) / static_cast<double>(n);
        out[r].values.push_back(draw(i, u));
      }
    }
    return out;
  }

  // Active dimensions rendered as text (the record of a trial).
  kv::Map describe(const Assignment& a) const {
    check_size(a);
    kv::Map m;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (!active(a, i)) continue;
      const auto& d = dims_[i];
      if (d.kind == Dimension::Kind::Categorical) m[d.name] = d.categories[static_cast<std::size_t>(a.values[i])];
      else if (d.kind == Dimension::Kind::Integer) m[d.name] = std::to_string(static_cast<long long>(a.values[i]));
      else m[d.name] = kv::format_double(a.values[i]);
    }
    return m;
  }

 private:
  void check_size(const Assignment& a) const {
    if (a.values.size() != dims_.size()) {
      throw ConfigError("assignment: expected " + std::to_string(dims_.size()) + " values for space " + name_);
    }
  }

  std::string name_;
  models::Family family_;
  std::vector<Dimension> dims_;
};

namespace detail {

inline Dimension integer(std::string name, int lo, int hi, std::string depends_on = "", int rank = 0) {
  return {Dimension::Kind::Integer, std::move(name), double(lo), double(hi), false, {}, std::move(depends_on), rank};
}
inline Dimension real(std::string name, double lo, double hi, bool log = false) {
  return {Dimension::Kind::Real, std::move(name), lo, hi, log, {}, "", 0};
}
inline Dimension categorical(std::string name, std::vector<std::string> cats) {
  return {Dimension::Kind::Categorical, std::move(name), 0, 0, false, std::move(cats), "", 0};
}

inline constexpr int kMaxDenseLayers = 5;
inline constexpr int kMaxConvLayers = 6;
inline constexpr int kMaxClassifierLayers = 3;

inline std::vector<Dimension> dense_dims(models::Family f) {
  std::vector<Dimension> d{categorical("window", {"10", "20", "30"}), integer("layers", 1, kMaxDenseLayers)};
  for (int l = 1; l <= kMaxDenseLayers; ++l) d.push_back(integer("units" + std::to_string(l), 5, 100, "layers", l));
  d.push_back(real("regularization", 1e-5, 1e-1, true));
  if (f == models::Family::MLP) d.push_back(categorical("activation", {"tanh", "relu", "silu"}));
  if (f == models::Family::KAN) {
    d.push_back(integer("k", 1, 5));
    d.push_back(integer("grid", 1, 15));
  }
  return d;
}

inline std::vector<Dimension> conv_dims(models::Family f) {
  std::vector<Dimension> d{categorical("window", {"10", "20", "30"}), integer("conv_layers", 1, kMaxConvLayers)};
  for (int l = 1; l <= kMaxConvLayers; ++l) {
    const auto s = std::to_string(l);
    d.push_back(integer("filters" + s, 5, 200, "conv_layers", l));
    d.push_back(integer("kernel" + s, 7, 15, "conv_layers", l));
    d.push_back(integer("pool" + s, 1, 3, "conv_layers", l));
  }
  d.push_back(categorical("padding", {"valid", "same"}));
  if (f == models::Family::CNN) d.push_back(categorical("conv_activation", {"relu", "tanh"}));
  else d.push_back(categorical("conv_activation", {"fkan1", "fkan2", "fkan3", "fkan4", "fkan5", "fkan6"}));
  d.push_back(real("dropout", 0.2, 0.8));
  d.push_back(categorical("global_pool", {"false", "true"}));
  d.push_back(integer("dense_layers", 0, kMaxClassifierLayers));
  for (int l = 1; l <= kMaxClassifierLayers; ++l) d.push_back(integer("dense" + std::to_string(l), 10, 500, "dense_layers", l));
  d.push_back(categorical("dense_activation", {"relu", "tanh"}));
  d.push_back(real("learning_rate", 1e-4, 1e-2, true));
  return d;
}

}  // namespace detail

inline SearchSpace space_for(models::Family f) {
  using models::Family;
  return is_convolutional(f) ? SearchSpace(std::string(to_string(f)) + " architecture search", f, detail::conv_dims(f))
                             : SearchSpace(std::string(to_string(f)) + " hyperparameter search", f, detail::dense_dims(f));
}

// Assignment -> model config, on top of `base` (epochs, learning rate for dense families).
// With valid padding a kernel or pool that would not fit the remaining feature length is
// shrunk to fit, and layers that can no longer host the smallest kernel are dropped.
inline models::ModelConfig to_config(const SearchSpace& s, const Assignment& a, models::ModelConfig base = {}) {
  using models::Family;
  models::ModelConfig c = std::move(base);
  c.family = s.family();
  c.window_size = std::stoi(s.category(a, "window"));
  if (!is_convolutional(c.family)) {
    c.hidden.clear();
    for (int l = 1; l <= s.integer(a, "layers"); ++l) c.hidden.push_back(s.integer(a, "units" + std::to_string(l)));
    c.regularization = s.value(a, "regularization");
    if (c.family == Family::MLP) c.activation = basis::parse_static_activation(s.category(a, "activation"));
    if (c.family == Family::KAN) {
      c.spline_order = s.integer(a, "k");
      c.grid_size = s.integer(a, "grid");
    }
    models::validate(c);
    return c;
  }
  c.padding = models::parse_padding(s.category(a, "padding"));
  c.filters.clear();
  c.kernels.clear();
  c.pools.clear();
  int len = c.window_size;
  for (int l = 1; l <= s.integer(a, "conv_layers"); ++l) {
    const auto t = std::to_string(l);
    int kernel = s.integer(a, "kernel" + t);
    if (c.padding == models::Padding::Valid) {
      if (len < 7) break;
      kernel = std::min(kernel, len);
      len -= kernel - 1;
    }
    const int pool = std::min(s.integer(a, "pool" + t), len);
    len /= pool;
    c.filters.push_back(s.integer(a, "filters" + t));
    c.kernels.push_back(kernel);
    c.pools.push_back(pool);
  }
  c.conv_activation = models::parse_conv_activation(s.category(a, "conv_activation"));
  c.dropout = s.value(a, "dropout");
  c.global_pool = s.category(a, "global_pool") == "true";
  c.dense.clear();
  for (int l = 1; l <= s.integer(a, "dense_layers"); ++l) c.dense.push_back(s.integer(a, "dense" + std::to_string(l)));
  c.dense_activation = basis::parse_static_activation(s.category(a, "dense_activation"));
  c.learning_rate = s.value(a, "learning_rate");
  models::validate(c);
  return c;
}

// Config -> canonical assignment (inactive dimensions at their lowest value).
inline Assignment from_config(const SearchSpace& s, const models::ModelConfig& c) {
  if (c.family != s.family()) throw ConfigError("family: config is " + std::string(to_string(c.family)) + ", space is " + s.name());
  Assignment a = s.lowest();
  auto set = [&](const std::string& name, double v) {
    const auto i = s.index(name);
    const auto& d = s.dims()[i];
    if (d.kind != Dimension::Kind::Categorical && (v < d.lo || v > d.hi)) {
      throw ConfigError(name + ": value " + kv::format_double(v) + " outside the search range");
    }
    a.values[i] = v;
  };
  auto set_category = [&](const std::string& name, const std::string& v) {
    const auto& cats = s.dims()[s.index(name)].categories;
    const auto it = std::find(cats.begin(), cats.end(), v);
    if (it == cats.end()) throw ConfigError(name + ": '" + v + "' is not a category of the search space");
    set(name, static_cast<double>(it - cats.begin()));
  };
  set_category("window", std::to_string(c.window_size));
  if (!is_convolutional(c.family)) {
    if (c.hidden.empty() || c.hidden.size() > detail::kMaxDenseLayers) throw ConfigError("hidden: 1 to 5 layers");
    set("layers", static_cast<double>(c.hidden.size()));
    for (std::size_t l = 0; l < c.hidden.size(); ++l) set("units" + std::to_string(l + 1), c.hidden[l]);
    set("regularization", c.regularization);
    if (c.family == models::Family::MLP) set_category("activation", std::string(basis::to_string(c.activation)));
    if (c.family == models::Family::KAN) {
      set("k", c.spline_order);
      set("grid", c.grid_size);
    }
    return s.canonical(a);
  }
  if (c.filters.empty() || c.filters.size() > detail::kMaxConvLayers) throw ConfigError("filters: 1 to 6 layers");
  set("conv_layers", static_cast<double>(c.filters.size()));
  for (std::size_t l = 0; l < c.filters.size(); ++l) {
    const auto t = std::to_string(l + 1);
    set("filters" + t, c.filters[l]);
    set("kernel" + t, c.kernels.at(l));
    set("pool" + t, c.pools.at(l));
  }
  set_category("padding", std::string(models::to_string(c.padding)));
  set_category("conv_activation", models::to_string(c.conv_activation));
  set("dropout", c.dropout);
  set_category("global_pool", c.global_pool ? "true" : "false");
  if (c.dense.size() > detail::kMaxClassifierLayers) throw ConfigError("dense: at most 3 classifier layers");
  set("dense_layers", static_cast<double>(c.dense.size()));
  for (std::size_t l = 0; l < c.dense.size(); ++l) set("dense" + std::to_string(l + 1), c.dense[l]);
  set_category("dense_activation", std::string(basis::to_string(c.dense_activation)));
  set("learning_rate", c.learning_rate);
  return s.canonical(a);
}

}  // namespace turnkan::hopt
