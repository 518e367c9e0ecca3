#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "turnkan/errors.hpp"

namespace turnkan::basis {

// Uniform knot grid on [lo, hi] with `intervals` cells and `order` extra knots
// on each side, carrying intervals + order basis functions of degree `order`.
class BSplineGrid {
 public:
  BSplineGrid(double lo, double hi, int intervals, int order) : lo_(lo), hi_(hi), intervals_(intervals), order_(order) {
    if (!(hi > lo)) throw ConfigError("bspline grid: domain upper bound must exceed lower bound");
    if (intervals < 1) throw ConfigError("bspline grid: grid size must be >= 1");
    if (order < 0) throw ConfigError("bspline grid: order k must be >= 0");
    h_ = (hi - lo) / intervals;
    knots_.resize(static_cast<std::size_t>(intervals + 2 * order + 1));
    for (std::size_t j = 0; j < knots_.size(); ++j) knots_[j] = lo + (static_cast<double>(j) - order) * h_;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int intervals() const { return intervals_; }
  int order() const { return order_; }
  double spacing() const { return h_; }
  const std::vector<double>& knots() const { return knots_; }
  std::size_t num_basis() const { return static_cast<std::size_t>(intervals_ + order_); }

  double clamp(double x) const { return std::clamp(x, lo_, hi_); }

  // Index j of the knot cell [t_j, t_{j+1}) holding clamped x; x == hi maps to the last interior cell.
  std::size_t span(double x) const {
    const double c = clamp(x);
    auto j = static_cast<long>(std::floor((c - knots_[0]) / h_));
    j = std::clamp(j, static_cast<long>(order_), static_cast<long>(order_ + intervals_ - 1));
    return static_cast<std::size_t>(j);
  }

 private:
  double lo_, hi_;
  int intervals_, order_;
  double h_;
  std::vector<double> knots_;
};

// All G+k basis values at x via the Cox-de Boor recursion. Inputs outside
// the domain are clamped to the boundary first.
inline std::vector<double> bspline_basis(double x, const BSplineGrid& grid) {
  const auto& t = grid.knots();
  const std::size_t cells = t.size() - 1;
  const std::size_t cell = grid.span(x);
  const double c = grid.clamp(x);
  std::vector<double> b(cells, 0.0);
  b[cell] = 1.0;
  for (int p = 1; p <= grid.order(); ++p) {
    const std::size_t n = cells - static_cast<std::size_t>(p);
    for (std::size_t j = 0; j < n; ++j) {
      const double left = (c - t[j]) / (t[j + p] - t[j]) * b[j];
      const double right = (t[j + p + 1] - c) / (t[j + p + 1] - t[j + 1]) * b[j + 1];
      b[j] = left + right;
    }
  }
  b.resize(grid.num_basis());
  return b;
}

// d/dx of bspline_basis; zero where the input is clamped.
inline std::vector<double> bspline_basis_derivative(double x, const BSplineGrid& grid) {
  std::vector<double> d(grid.num_basis(), 0.0);
  const int k = grid.order();
  if (k == 0 || x < grid.lo() || x > grid.hi()) return d;
  // Degree k-1 functions on the degree-k knot vector: index shift of one.
  const auto& t = grid.knots();
  const std::size_t cells = t.size() - 1;
  const std::size_t cell = grid.span(x);
  std::vector<double> b(cells, 0.0);
  b[cell] = 1.0;
  for (int p = 1; p < k; ++p) {
    const std::size_t n = cells - static_cast<std::size_t>(p);
    for (std::size_t j = 0; j < n; ++j) {
      const double left = (x - t[j]) / (t[j + p] - t[j]) * b[j];
      const double right = (t[j + p + 1] - x) / (t[j + p + 1] - t[j + 1]) * b[j + 1];
      b[j] = left + right;
    }
  }
  const double h = grid.spacing();
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = (b[j] - b[j + 1]) / h;
  return d;
}

// The k+1 basis functions that can be non-zero at x, with derivatives:
// values[r] = B_{first+r}(x). Uses the triangular de Boor scheme on the
// uniform grid; derivative is zero outside the domain.
struct LocalBasis {
  std::size_t first = 0;
  std::vector<double> values;
  std::vector<double> derivatives;
};

inline constexpr int kMaxLocalOrder = 14;

inline void bspline_local(double x, const BSplineGrid& grid, LocalBasis& out) {
  const int k = grid.order();
  if (k > kMaxLocalOrder) throw ConfigError("bspline_local: order above " + std::to_string(kMaxLocalOrder));
  const std::size_t cell = grid.span(x);
  const bool inside = x >= grid.lo() && x <= grid.hi();
  const double c = grid.clamp(x);
  const auto& t = grid.knots();
  const std::size_t m = static_cast<std::size_t>(k) + 1;
  out.first = cell - static_cast<std::size_t>(k);
  out.values.assign(m, 0.0);
  out.derivatives.assign(m, 0.0);

  // N holds degree-p functions B_{cell-p..cell}; lower keeps degree k-1 for the derivative.
  double N[16];
  double lower[16];
  N[0] = 1.0;
  for (int p = 1; p <= k; ++p) {
    if (p == k) std::copy(N, N + p, lower);
    double next[16];
    for (int r = 0; r <= p; ++r) {
      const long j = static_cast<long>(cell) - p + r;
      double v = 0;
      if (r > 0) {  // B_{j,p-1} is N[r-1]
        v += (c - t[j]) / (t[j + p] - t[j]) * N[r - 1];
      }
      if (r < p) {  // B_{j+1,p-1} is N[r]
        v += (t[j + p + 1] - c) / (t[j + p + 1] - t[j + 1]) * N[r];
      }
      next[r] = v;
    }
    std::copy(next, next + p + 1, N);
  }
  std::copy(N, N + m, out.values.begin());
  if (k > 0 && inside) {
    const double h = grid.spacing();
    // dB_{j,k} = (B_{j,k-1} - B_{j+1,k-1}) / h with lower[r] = B_{cell-k+1+r, k-1}.
    for (int r = 0; r <= k; ++r) {
      const double left = r > 0 ? lower[r - 1] : 0.0;
      const double right = r < k ? lower[r] : 0.0;
      out.derivatives[r] = (left - right) / h;
    }
  }
}

}  // namespace turnkan::basis
