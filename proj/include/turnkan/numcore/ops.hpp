#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "turnkan/numcore/tape.hpp"

namespace turnkan::num {

namespace detail {

inline void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw ShapeError(std::string(op) + ": " + what);
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <class F, class D>
Var unary(Var x, const char* op, F f, D dfdx) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return x.tape->record(std::move(out), {x}, [dfdx](BackwardContext& ctx) {
    Tensor* gx = ctx.input_grad(0);
    if (!gx) return;
    const Tensor& g = ctx.grad_output();
    const Tensor& xin = ctx.input(0);
    const Tensor& y = ctx.output();
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * dfdx(xin[i], y[i]);
  }, op);
}

}  // namespace detail

using detail::sigmoid;

inline Var add(Var a, Var b) {
  detail::require(a.shape() == b.shape(), "add", shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  return a.tape->record(std::move(out), {a, b}, [](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    for (std::size_t k = 0; k < 2; ++k) {
      if (Tensor* gi = ctx.input_grad(k)) {
        for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
      }
    }
  }, "add");
}

inline Var mul(Var a, Var b) {
  detail::require(a.shape() == b.shape(), "mul", shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return a.tape->record(std::move(out), {a, b}, [](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    if (Tensor* ga = ctx.input_grad(0)) {
      const Tensor& bv = ctx.input(1);
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    }
    if (Tensor* gb = ctx.input_grad(1)) {
      const Tensor& av = ctx.input(0);
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  }, "mul");
}

inline Var scale(Var x, double c) {
  return detail::unary(x, "scale", [c](double v) { return c * v; }, [c](double, double) { return c; });
}

inline Var square(Var x) {
  return detail::unary(x, "square", [](double v) { return v * v; }, [](double v, double) { return 2 * v; });
}

inline Var tanh(Var x) {
  return detail::unary(x, "tanh", [](double v) { return std::tanh(v); },
                       [](double, double y) { return 1 - y * y; });
}

// Derivative at exactly 0 is taken as 0.
inline Var relu(Var x) {
  return detail::unary(x, "relu", [](double v) { return v > 0 ? v : 0.0; },
                       [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

inline Var sigmoid(Var x) {
  return detail::unary(x, "sigmoid", [](double v) { return sigmoid(v); },
                       [](double, double y) { return y * (1 - y); });
}

inline Var silu(Var x) {
  return detail::unary(x, "silu", [](double v) { return v * sigmoid(v); }, [](double v, double) {
    const double s = sigmoid(v);
    return s * (1 + v * (1 - s));
  });
}

inline Var sum(Var x) {
  const Tensor& xv = x.value();
  double s = 0;
  for (double v : xv.data()) s += v;
  return x.tape->record(Tensor::scalar(s), {x}, [](BackwardContext& ctx) {
    if (Tensor* gx = ctx.input_grad(0)) {
      const double g = ctx.grad_output()[0];
      for (double& v : gx->data()) v += g;
    }
  }, "sum");
}

inline Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

inline Var sum_abs(Var x) {
  const Tensor& xv = x.value();
  double s = 0;
  for (double v : xv.data()) s += std::abs(v);
  return x.tape->record(Tensor::scalar(s), {x}, [](BackwardContext& ctx) {
    if (Tensor* gx = ctx.input_grad(0)) {
      const double g = ctx.grad_output()[0];
      const Tensor& xin = ctx.input(0);
      for (std::size_t i = 0; i < xin.size(); ++i) {
        (*gx)[i] += g * (xin[i] > 0 ? 1.0 : (xin[i] < 0 ? -1.0 : 0.0));
      }
    }
  }, "sum_abs");
}

inline Var sum_squares(Var x) { return sum(square(x)); }

inline Var reshape(Var x, Shape shape) {
  const Tensor& xv = x.value();
  detail::require(shape_size(shape) == xv.size(), "reshape", shape_string(xv.shape()) + " -> " + shape_string(shape));
  return x.tape->record(xv.reshaped(std::move(shape)), {x}, [](BackwardContext& ctx) {
    if (Tensor* gx = ctx.input_grad(0)) {
      const Tensor& g = ctx.grad_output();
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
    }
  }, "reshape");
}

// [B,n] x [n,m] -> [B,m]
inline Var matmul(Var a, Var w) {
  const Tensor& av = a.value();
  const Tensor& wv = w.value();
  detail::require(av.rank() == 2 && wv.rank() == 2 && av.dim(1) == wv.dim(0), "matmul",
                  shape_string(av.shape()) + " x " + shape_string(wv.shape()));
  const std::size_t B = av.dim(0), n = av.dim(1), m = wv.dim(1);
  Tensor out({B, m});
  for (std::size_t b = 0; b < B; ++b) {
    double* o = &out[b * m];
    for (std::size_t i = 0; i < n; ++i) {
      const double x = av[b * n + i];
      if (x == 0.0) continue;
      const double* wr = &wv[i * m];
      for (std::size_t j = 0; j < m; ++j) o[j] += x * wr[j];
    }
  }
  return a.tape->record(std::move(out), {a, w}, [B, n, m](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& av = ctx.input(0);
    const Tensor& wv = ctx.input(1);
    if (Tensor* ga = ctx.input_grad(0)) {
      for (std::size_t b = 0; b < B; ++b) {
        const double* gr = &g[b * m];
        for (std::size_t i = 0; i < n; ++i) {
          const double* wr = &wv[i * m];
          double s = 0;
          for (std::size_t j = 0; j < m; ++j) s += gr[j] * wr[j];
          (*ga)[b * n + i] += s;
        }
      }
    }
    if (Tensor* gw = ctx.input_grad(1)) {
      for (std::size_t b = 0; b < B; ++b) {
        const double* gr = &g[b * m];
        for (std::size_t i = 0; i < n; ++i) {
          const double x = av[b * n + i];
          if (x == 0.0) continue;
          double* gwr = &(*gw)[i * m];
          for (std::size_t j = 0; j < m; ++j) gwr[j] += x * gr[j];
        }
      }
    }
  }, "matmul");
}

// Adds bias[m] along the last axis of x[..., m].
inline Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  detail::require(bv.rank() == 1 && xv.rank() >= 1 && xv.shape().back() == bv.dim(0), "add_bias",
                  shape_string(xv.shape()) + " + " + shape_string(bv.shape()));
  const std::size_t m = bv.dim(0);
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % m];
  return x.tape->record(std::move(out), {x, bias}, [m](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    if (Tensor* gx = ctx.input_grad(0)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
    }
    if (Tensor* gb = ctx.input_grad(1)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i % m] += g[i];
    }
  }, "add_bias");
}

enum class Padding { Valid, Same };

// x[B,L,C] * kernel[K,C,F] + bias[F] -> [B,L',F]; L' = L-K+1 (valid) or L (same,
// zero padded with floor((K-1)/2) on the left).
inline Var conv1d(Var x, Var kernel, Var bias, Padding padding) {
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  const Tensor& bv = bias.value();
  detail::require(xv.rank() == 3 && kv.rank() == 3 && bv.rank() == 1 && kv.dim(1) == xv.dim(2) &&
                      bv.dim(0) == kv.dim(2),
                  "conv1d", shape_string(xv.shape()) + " * " + shape_string(kv.shape()) + " + " +
                                shape_string(bv.shape()));
  const std::size_t B = xv.dim(0), L = xv.dim(1), C = xv.dim(2), K = kv.dim(0), F = kv.dim(2);
  const bool same = padding == Padding::Same;
  detail::require(same || K <= L, "conv1d", "kernel " + std::to_string(K) + " longer than input " + std::to_string(L));
  const std::size_t Lout = same ? L : L - K + 1;
  const std::ptrdiff_t pad_left = same ? static_cast<std::ptrdiff_t>((K - 1) / 2) : 0;

  Tensor out({B, Lout, F});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t l = 0; l < Lout; ++l) {
      double* o = &out[(b * Lout + l) * F];
      for (std::size_t f = 0; f < F; ++f) o[f] = bv[f];
      for (std::size_t k = 0; k < K; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(l + k) - pad_left;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(L)) continue;
        const double* xr = &xv[(b * L + static_cast<std::size_t>(src)) * C];
        for (std::size_t c = 0; c < C; ++c) {
          const double xval = xr[c];
          const double* kr = &kv[(k * C + c) * F];
          for (std::size_t f = 0; f < F; ++f) o[f] += xval * kr[f];
        }
      }
    }
  }
  return x.tape->record(std::move(out), {x, kernel, bias}, [=](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& xv = ctx.input(0);
    const Tensor& kv = ctx.input(1);
    Tensor* gx = ctx.input_grad(0);
    Tensor* gk = ctx.input_grad(1);
    if (Tensor* gb = ctx.input_grad(2)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i % F] += g[i];
    }
    if (!gx && !gk) return;
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t l = 0; l < Lout; ++l) {
        const double* gr = &g[(b * Lout + l) * F];
        for (std::size_t k = 0; k < K; ++k) {
          const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(l + k) - pad_left;
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(L)) continue;
          const std::size_t xoff = (b * L + static_cast<std::size_t>(src)) * C;
          for (std::size_t c = 0; c < C; ++c) {
            const std::size_t koff = (k * C + c) * F;
            if (gk) {
              const double xval = xv[xoff + c];
              double* gkr = &(*gk)[koff];
              for (std::size_t f = 0; f < F; ++f) gkr[f] += xval * gr[f];
            }
            if (gx) {
              const double* kr = &kv[koff];
              double s = 0;
              for (std::size_t f = 0; f < F; ++f) s += kr[f] * gr[f];
              (*gx)[xoff + c] += s;
            }
          }
        }
      }
    }
  }, "conv1d");
}

// Non-overlapping max pooling along axis 1 of x[B,L,C]; output length floor(L/p).
// Ties resolve to the earliest index.
inline Var maxpool1d(Var x, std::size_t pool) {
  const Tensor& xv = x.value();
  detail::require(xv.rank() == 3 && pool >= 1 && xv.dim(1) >= pool, "maxpool1d",
                  "input " + shape_string(xv.shape()) + " with pool " + std::to_string(pool));
  if (pool == 1) return x;
  const std::size_t B = xv.dim(0), L = xv.dim(1), C = xv.dim(2), Lout = L / pool;
  Tensor out({B, Lout, C});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t l = 0; l < Lout; ++l) {
      for (std::size_t c = 0; c < C; ++c) {
        std::size_t best = (b * L + l * pool) * C + c;
        for (std::size_t q = 1; q < pool; ++q) {
          const std::size_t idx = (b * L + l * pool + q) * C + c;
          if (xv[idx] > xv[best]) best = idx;
        }
        const std::size_t o = (b * Lout + l) * C + c;
        out[o] = xv[best];
        (*argmax)[o] = best;
      }
    }
  }
  return x.tape->record(std::move(out), {x}, [argmax](BackwardContext& ctx) {
    if (Tensor* gx = ctx.input_grad(0)) {
      const Tensor& g = ctx.grad_output();
      for (std::size_t o = 0; o < g.size(); ++o) (*gx)[(*argmax)[o]] += g[o];
    }
  }, "maxpool1d");
}

// Mean over axis 1 of x[B,L,C] -> [B,C].
inline Var global_avg_pool(Var x) {
  const Tensor& xv = x.value();
  detail::require(xv.rank() == 3, "global_avg_pool", "input " + shape_string(xv.shape()));
  const std::size_t B = xv.dim(0), L = xv.dim(1), C = xv.dim(2);
  Tensor out({B, C});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t c = 0; c < C; ++c) out[b * C + c] += xv[(b * L + l) * C + c] / static_cast<double>(L);
  return x.tape->record(std::move(out), {x}, [B, L, C](BackwardContext& ctx) {
    if (Tensor* gx = ctx.input_grad(0)) {
      const Tensor& g = ctx.grad_output();
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t l = 0; l < L; ++l)
          for (std::size_t c = 0; c < C; ++c) (*gx)[(b * L + l) * C + c] += g[b * C + c] / static_cast<double>(L);
    }
  }, "global_avg_pool");
}

// Inverted dropout; identity when rate == 0.
inline Var dropout(Var x, double rate, std::mt19937_64& rng) {
  detail::require(rate >= 0 && rate < 1, "dropout", "rate " + std::to_string(rate));
  if (rate == 0) return x;
  const Tensor& xv = x.value();
  auto mask = std::make_shared<std::vector<double>>(xv.size());
  std::bernoulli_distribution keep(1 - rate);
  const double s = 1 / (1 - rate);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    (*mask)[i] = keep(rng) ? s : 0.0;
    out[i] = xv[i] * (*mask)[i];
  }
  return x.tape->record(std::move(out), {x}, [mask](BackwardContext& ctx) {
    if (Tensor* gx = ctx.input_grad(0)) {
      const Tensor& g = ctx.grad_output();
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * (*mask)[i];
    }
  }, "dropout");
}

// Row-wise softmax of logits[B,C]; forward-only helper.
inline Tensor softmax_rows(const Tensor& logits) {
  detail::require(logits.rank() == 2, "softmax", "logits " + shape_string(logits.shape()));
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  Tensor out(logits.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const double* z = &logits[b * C];
    const double mx = *std::max_element(z, z + C);
    double denom = 0;
    for (std::size_t c = 0; c < C; ++c) denom += std::exp(z[c] - mx);
    for (std::size_t c = 0; c < C; ++c) out[b * C + c] = std::exp(z[c] - mx) / denom;
  }
  return out;
}

// Fused softmax + class-weighted cross-entropy:
//   mean_b  w[y_b] * (logsumexp(z_b) - z_b[y_b])
inline Var weighted_softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const double> weights) {
  const Tensor& zv = logits.value();
  detail::require(zv.rank() == 2 && zv.dim(0) == labels.size() && zv.dim(1) == weights.size(),
                  "weighted_softmax_cross_entropy",
                  "logits " + shape_string(zv.shape()) + ", " + std::to_string(labels.size()) + " labels, " +
                      std::to_string(weights.size()) + " weights");
  const std::size_t B = zv.dim(0), C = zv.dim(1);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= C) {
      throw DataError("weighted_softmax_cross_entropy: label " + std::to_string(y) + " outside class set");
    }
  }
  Tensor probs = softmax_rows(zv);
  double loss = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const double* z = &zv[b * C];
    const double mx = *std::max_element(z, z + C);
    double denom = 0;
    for (std::size_t c = 0; c < C; ++c) denom += std::exp(z[c] - mx);
    const double lse = mx + std::log(denom);
    loss += weights[static_cast<std::size_t>(labels[b])] * (lse - z[labels[b]]);
  }
  loss /= static_cast<double>(B);
  std::vector<int> ys(labels.begin(), labels.end());
  std::vector<double> ws(weights.begin(), weights.end());
  return logits.tape->record(Tensor::scalar(loss), {logits},
                             [probs = std::move(probs), ys = std::move(ys), ws = std::move(ws), B, C](BackwardContext& ctx) {
    if (Tensor* gz = ctx.input_grad(0)) {
      const double g = ctx.grad_output()[0] / static_cast<double>(B);
      for (std::size_t b = 0; b < B; ++b) {
        const double w = ws[static_cast<std::size_t>(ys[b])];
        for (std::size_t c = 0; c < C; ++c) {
          const double onehot = static_cast<int>(c) == ys[b] ? 1.0 : 0.0;
          (*gz)[b * C + c] += g * w * (probs[b * C + c] - onehot);
        }
      }
    }
  }, "weighted_softmax_cross_entropy");
}

}  // namespace turnkan::num
