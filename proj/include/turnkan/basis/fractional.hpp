#pragma once

#include <cmath>

#include "turnkan/errors.hpp"

namespace turnkan::basis {

inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// sigmoid(x)^lambda, the fractional-order input map; lambda in (0, 1].
inline double fractional_transform(double x, double lambda) {
  if (!(lambda > 0 && lambda <= 1)) throw DomainError("fractional_transform: lambda must lie in (0, 1]");
  return std::pow(logistic(x), lambda);
}

struct FractionalGrad {
  double value;
  double d_x;
  double d_lambda;
};

inline FractionalGrad fractional_transform_grad(double x, double lambda) {
  if (!(lambda > 0 && lambda <= 1)) throw DomainError("fractional_transform: lambda must lie in (0, 1]");
  const double s = logistic(x);
  const double v = std::pow(s, lambda);
  // log(s) = -log1p(exp(-x)), evaluated stably for both signs of x.
  const double log_s = x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
  return {v, lambda * v * (1 - s), v * log_s};
}

}  // namespace turnkan::basis
