#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "turnkan/basis/fractional.hpp"
#include "turnkan/errors.hpp"

namespace turnkan::basis {

enum class StaticActivation { Tanh, Relu, Silu };

inline StaticActivation parse_static_activation(std::string_view name) {
  if (name == "tanh") return StaticActivation::Tanh;
  if (name == "relu") return StaticActivation::Relu;
  if (name == "silu") return StaticActivation::Silu;
  throw ConfigError("activation: unknown name '" + std::string(name) + "'");
}

inline std::string_view to_string(StaticActivation a) {
  switch (a) {
    case StaticActivation::Tanh: return "tanh";
    case StaticActivation::Relu: return "relu";
    case StaticActivation::Silu: return "silu";
  }
  return "?";
}

inline double static_activation(StaticActivation a, double x) {
  switch (a) {
    case StaticActivation::Tanh: return std::tanh(x);
    case StaticActivation::Relu: return x > 0 ? x : 0.0;
    case StaticActivation::Silu: return x * logistic(x);
  }
  return x;
}

inline double static_activation(std::string_view name, double x) {
  return static_activation(parse_static_activation(name), x);
}

}  // namespace turnkan::basis
