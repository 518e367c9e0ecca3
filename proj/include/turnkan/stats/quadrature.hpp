#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "turnkan/errors.hpp"

namespace turnkan::stats {

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kXk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                           0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kWk[7];
  double g = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double x = h * kXk[i];
    const double s = f(c - x) + f(c + x);
    k += kWk[i] * s;
    if (i % 2 == 1) g += kWg[i / 2] * s;
  }
  return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace detail

struct QuadratureResult {
  double value;
  double error;
  int segments;
};

// Globally adaptive Gauss-Kronrod on a finite interval. Bisects the segment with the
// largest error estimate until the total error is within rel_tol (or abs_tol).
// Throws NumericalError when the budget runs out or the integrand is not finite.
template <class F>
QuadratureResult integrate(F f, double a, double b, double rel_tol = 1e-6, double abs_tol = 0.0,
                           int max_segments = 2000) {
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gk15(f, a, b);
  double value = first.value, error = first.error;
  heap.push(first);
  int segments = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (!std::isfinite(value) || !std::isfinite(error)) throw NumericalError("quadrature: integrand is not finite");
    if (segments >= max_segments) {
      throw NumericalError("quadrature: no convergence after " + std::to_string(segments) +
                           " segments (estimated relative error " + std::to_string(error / std::abs(value)) + ")");
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // Re-sum to shed the drift of the running totals.
  value = 0;
  error = 0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(value)) throw NumericalError("quadrature: integrand is not finite");
  return {value, error, segments};
}

}  // namespace turnkan::stats
