#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "turnkan/basis/bspline.hpp"
#include "turnkan/basis/fractional.hpp"
#include "turnkan/basis/jacobi.hpp"
#include "turnkan/numcore/ops.hpp"

namespace turnkan::models {

using num::BackwardContext;
using num::Tensor;
using num::Var;

// One KAN layer: every edge (i -> o) carries
//   phi(x) = base[i,o] * silu(x) + scale[i,o] * sum_j coef[i,o,j] * B_j(tanh(x))
// and every output node sums its incoming edges.
// x[B,in], base[in,out], scale[in,out], coef[in,out,G+k] -> [B,out]
inline Var kan_layer(Var x, Var base, Var scale, Var coef, const basis::BSplineGrid& grid) {
  const Tensor& xv = x.value();
  const Tensor& bw = base.value();
  const Tensor& sw = scale.value();
  const Tensor& cw = coef.value();
  const std::size_t nb = grid.num_basis();
  num::detail::require(xv.rank() == 2 && bw.rank() == 2 && bw.dim(0) == xv.dim(1) && sw.shape() == bw.shape() &&
                           cw.rank() == 3 && cw.dim(0) == bw.dim(0) && cw.dim(1) == bw.dim(1) && cw.dim(2) == nb,
                       "kan_layer",
                       "x " + num::shape_string(xv.shape()) + ", base " + num::shape_string(bw.shape()) + ", scale " +
                           num::shape_string(sw.shape()) + ", coef " + num::shape_string(cw.shape()));
  const std::size_t B = xv.dim(0), in = xv.dim(1), out = bw.dim(1);
  const std::size_t m = static_cast<std::size_t>(grid.order()) + 1;

  Tensor y({B, out});
  basis::LocalBasis lb;
  for (std::size_t b = 0; b < B; ++b) {
    double* yr = &y[b * out];
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xv[b * in + i];
      const double s = xi * num::sigmoid(xi);
      basis::bspline_local(std::tanh(xi), grid, lb);
      const double* brow = &bw[i * out];
      const double* srow = &sw[i * out];
      const double* crow = &cw[(i * out) * nb + lb.first];
      for (std::size_t o = 0; o < out; ++o) {
        const double* c = crow + o * nb;
        double spl = 0;
        for (std::size_t r = 0; r < m; ++r) spl += c[r] * lb.values[r];
        yr[o] += brow[o] * s + srow[o] * spl;
      }
    }
  }

  return x.tape->record(std::move(y), {x, base, scale, coef}, [grid, B, in, out, nb, m](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& xv = ctx.input(0);
    const Tensor& bw = ctx.input(1);
    const Tensor& sw = ctx.input(2);
    const Tensor& cw = ctx.input(3);
    Tensor* gx = ctx.input_grad(0);
    Tensor* gb = ctx.input_grad(1);
    Tensor* gs = ctx.input_grad(2);
    Tensor* gc = ctx.input_grad(3);
    basis::LocalBasis lb;
    for (std::size_t b = 0; b < B; ++b) {
      const double* gr = &g[b * out];
      for (std::size_t i = 0; i < in; ++i) {
        const double xi = xv[b * in + i];
        const double sig = num::sigmoid(xi);
        const double s = xi * sig;
        const double ds = sig * (1 + xi * (1 - sig));
        const double u = std::tanh(xi);
        const double du = 1 - u * u;
        basis::bspline_local(u, grid, lb);
        const std::size_t eoff = i * out;
        double acc_x = 0;
        for (std::size_t o = 0; o < out; ++o) {
          const double go = gr[o];
          if (go == 0.0) continue;
          const std::size_t cbase = (eoff + o) * nb + lb.first;
          const double* c = &cw[cbase];
          double spl = 0, dspl = 0;
          for (std::size_t r = 0; r < m; ++r) {
            spl += c[r] * lb.values[r];
            dspl += c[r] * lb.derivatives[r];
          }
          if (gb) (*gb)[eoff + o] += go * s;
          if (gs) (*gs)[eoff + o] += go * spl;
          if (gc) {
            const double f = go * sw[eoff + o];
            double* gcr = &(*gc)[cbase];
            for (std::size_t r = 0; r < m; ++r) gcr[r] += f * lb.values[r];
          }
          acc_x += go * (bw[eoff + o] * ds + sw[eoff + o] * dspl * du);
        }
        if (gx) (*gx)[b * in + i] += acc_x;
      }
    }
  }, "kan_layer");
}

inline constexpr int kMaxJacobiDegree = 6;

// Elementwise fractional-Jacobi activation on x[B,L,C]:
//   y = sum_n coef[c,n] * P_n^{(alpha,beta)}(2 * sigmoid(x)^lambda - 1),  lambda = sigmoid(lambda_raw)
// with one coefficient row per channel and a single shared lambda.
inline Var fkan_activation(Var x, Var coef, Var lambda_raw, int degree, double alpha = 0.0, double beta = 0.0) {
  const Tensor& xv = x.value();
  const Tensor& cv = coef.value();
  const Tensor& lv = lambda_raw.value();
  num::detail::require(degree >= 0 && degree <= kMaxJacobiDegree, "fkan_activation",
                       "degree " + std::to_string(degree) + " outside [0, 6]");
  basis::check_jacobi_args(degree, alpha, beta);
  num::detail::require(xv.rank() == 3 && cv.rank() == 2 && cv.dim(0) == xv.dim(2) &&
                           cv.dim(1) == static_cast<std::size_t>(degree) + 1 && lv.size() == 1,
                       "fkan_activation",
                       "x " + num::shape_string(xv.shape()) + ", coef " + num::shape_string(cv.shape()) +
                           ", lambda " + num::shape_string(lv.shape()));
  const std::size_t C = xv.dim(2), nd = static_cast<std::size_t>(degree) + 1;
  const double lambda = num::sigmoid(lv[0]);
  Tensor y(xv.shape());
  double P[kMaxJacobiDegree + 1], dP[kMaxJacobiDegree + 1];
  for (std::size_t e = 0; e < xv.size(); ++e) {
    const std::size_t c = e % C;
    const double z = 2 * basis::fractional_transform(xv[e], lambda) - 1;
    basis::jacobi_fill(degree, alpha, beta, z, P, dP);
    double acc = 0;
    for (std::size_t n = 0; n < nd; ++n) acc += cv[c * nd + n] * P[n];
    y[e] = acc;
  }
  return x.tape->record(std::move(y), {x, coef, lambda_raw}, [=](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& xv = ctx.input(0);
    const Tensor& cv = ctx.input(1);
    Tensor* gx = ctx.input_grad(0);
    Tensor* gc = ctx.input_grad(1);
    Tensor* gl = ctx.input_grad(2);
    double P[kMaxJacobiDegree + 1], dP[kMaxJacobiDegree + 1];
    double glam = 0;
    for (std::size_t e = 0; e < xv.size(); ++e) {
      const double ge = g[e];
      if (ge == 0.0) continue;
      const std::size_t c = e % C;
      const auto fr = basis::fractional_transform_grad(xv[e], lambda);
      const double z = 2 * fr.value - 1;
      basis::jacobi_fill(degree, alpha, beta, z, P, dP);
      double dydz = 0;
      for (std::size_t n = 0; n < nd; ++n) {
        dydz += cv[c * nd + n] * dP[n];
        if (gc) (*gc)[c * nd + n] += ge * P[n];
      }
      if (gx) (*gx)[e] += ge * dydz * 2 * fr.d_x;
      glam += ge * dydz * 2 * fr.d_lambda;
    }
    if (gl) (*gl)[0] += glam * lambda * (1 - lambda);
  }, "fkan_activation");
}

}  // namespace turnkan::models
