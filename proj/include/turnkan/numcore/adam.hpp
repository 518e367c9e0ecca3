#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "turnkan/numcore/tensor.hpp"

namespace turnkan::num {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moment buffers are keyed by position in the
// parameter list, so the same list must be passed on every step.
class Adam {
 public:
  explicit Adam(AdamOptions opts = {}) : opts_(opts) {
    if (!(opts_.learning_rate >= 0)) throw ConfigError("adam: learning_rate must be >= 0");
    if (!(opts_.beta1 >= 0 && opts_.beta1 < 1)) throw ConfigError("adam: beta1 must be in [0,1)");
    if (!(opts_.beta2 >= 0 && opts_.beta2 < 1)) throw ConfigError("adam: beta2 must be in [0,1)");
    if (!(opts_.epsilon > 0)) throw ConfigError("adam: epsilon must be > 0");
  }

  const AdamOptions& options() const { return opts_; }
  std::size_t steps() const { return t_; }

  void step(std::vector<Parameter>& params) {
    if (m_.empty()) {
      for (const Parameter& p : params) {
        m_.emplace_back(p.value.shape(), 0.0);
        v_.emplace_back(p.value.shape(), 0.0);
      }
    }
    if (m_.size() != params.size()) throw ShapeError("adam: parameter list changed between steps");
    for (const Parameter& p : params) {
      if (!p.grad.all_finite()) throw NumericalError("adam: non-finite gradient in parameter '" + p.name + "'");
    }
    ++t_;
    const double bc1 = 1 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double bc2 = 1 - std::pow(opts_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Parameter& p = params[k];
      if (!p.requires_grad) continue;
      Tensor& m = m_[k];
      Tensor& v = v_[k];
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i];
        m[i] = opts_.beta1 * m[i] + (1 - opts_.beta1) * g;
        v[i] = opts_.beta2 * v[i] + (1 - opts_.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p.value[i] -= opts_.learning_rate * mhat / (std::sqrt(vhat) + opts_.epsilon);
      }
    }
  }

 private:
  AdamOptions opts_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t t_ = 0;
};

}  // namespace turnkan::num
