#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "turnkan/numcore/tape.hpp"

namespace turnkan::num {

// Builds a scalar-valued graph on the given tape. Parameters are bound with tape.param().
using Graph = std::function<Var(Tape&)>;

struct ForwardBackwardResult {
  double output = 0;
  std::vector<Tensor> gradients;  // one per parameter, in argument order
};

inline ForwardBackwardResult forward_backward(const Graph& graph, std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
  Tape tape;
  Var out = graph(tape);
  tape.backward(out);
  ForwardBackwardResult r;
  r.output = out.value().item();
  r.gradients.reserve(params.size());
  for (Parameter* p : params) r.gradients.push_back(p->grad);
  return r;
}

inline double evaluate(const Graph& graph) {
  Tape tape(false);
  return graph(tape).value().item();
}

// Max over the parameter's entries of
//   |analytic - central| / max(|analytic|, |central|, 1e-12).
inline double finite_diff_check(const Graph& graph, Parameter& param, double eps) {
  if (!(eps > 0)) throw DomainError("finite_diff_check: step must be positive");
  Parameter* p = &param;
  const Tensor analytic = forward_backward(graph, std::span<Parameter* const>(&p, 1)).gradients.front();
  double worst = 0;
  for (std::size_t i = 0; i < param.value.size(); ++i) {
    const double orig = param.value[i];
    param.value[i] = orig + eps;
    const double up = evaluate(graph);
    param.value[i] = orig - eps;
    const double down = evaluate(graph);
    param.value[i] = orig;
    const double central = (up - down) / (2 * eps);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(central), 1e-12});
    worst = std::max(worst, std::abs(a - central) / denom);
  }
  return worst;
}

}  // namespace turnkan::num
