#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "turnkan/errors.hpp"

namespace turnkan::basis {

struct JacobiValues {
  std::vector<double> values;       // P_0 .. P_d
  std::vector<double> derivatives;  // dP_n/dx
};

inline void check_jacobi_args(int degree, double alpha, double beta) {
  if (degree < 0) throw DomainError("jacobi: degree must be >= 0");
  if (!(alpha > -1) || !(beta > -1)) throw DomainError("jacobi: alpha and beta must exceed -1");
}

// Writes P_0..P_d of P^{(alpha,beta)} at x into p[] and their derivatives into dp[]
// using the three-term recurrence, differentiated term by term. No argument checks.
inline void jacobi_fill(int degree, double alpha, double beta, double x, double* p, double* dp) {
  p[0] = 1;
  dp[0] = 0;
  if (degree == 0) return;
  const double ab = alpha + beta;
  p[1] = (alpha + 1) + (ab + 2) * (x - 1) / 2;
  dp[1] = (ab + 2) / 2;
  for (int n = 2; n <= degree; ++n) {
    const double nn = n;
    const double c2n = 2 * nn + ab;
    const double a = 2 * nn * (nn + ab) * (c2n - 2);
    const double b = (c2n - 1) * (c2n * (c2n - 2));
    const double b0 = (c2n - 1) * (alpha * alpha - beta * beta);
    const double c = 2 * (nn + alpha - 1) * (nn + beta - 1) * c2n;
    p[n] = ((b * x + b0) * p[n - 1] - c * p[n - 2]) / a;
    dp[n] = (b * p[n - 1] + (b * x + b0) * dp[n - 1] - c * dp[n - 2]) / a;
  }
}

inline JacobiValues jacobi_eval_with_derivative(int degree, double alpha, double beta, double x) {
  check_jacobi_args(degree, alpha, beta);
  if (!(std::abs(x) <= 1)) throw DomainError("jacobi: |x| must be <= 1, got " + std::to_string(x));
  JacobiValues r;
  r.values.resize(static_cast<std::size_t>(degree) + 1);
  r.derivatives.resize(r.values.size());
  jacobi_fill(degree, alpha, beta, x, r.values.data(), r.derivatives.data());
  return r;
}

inline std::vector<double> jacobi_eval(int degree, double alpha, double beta, double x) {
  return jacobi_eval_with_derivative(degree, alpha, beta, x).values;
}

// P_d^{(alpha,beta)}(1) = C(d + alpha, d).
inline double jacobi_at_one(int degree, double alpha) {
  return std::exp(std::lgamma(degree + alpha + 1) - std::lgamma(degree + 1.0) - std::lgamma(alpha + 1));
}

}  // namespace turnkan::basis
