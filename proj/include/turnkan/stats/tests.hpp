#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "turnkan/errors.hpp"
#include "turnkan/stats/quadrature.hpp"

namespace turnkan::stats {

// Scores of two conditions over the same units (divisions or subjects).
struct PairedScores {
  std::vector<double> a;
  std::vector<double> b;
  std::string label_a = "A";
  std::string label_b = "B";

  void validate() const {
    if (a.size() != b.size()) {
      throw StatsError("paired scores: " + label_a + " has " + std::to_string(a.size()) + " values, " + label_b +
                       " has " + std::to_string(b.size()));
    }
    for (const auto* v : {&a, &b}) {
      for (double x : *v) {
        if (!(x >= 0 && x <= 1)) throw StatsError("paired scores: value " + std::to_string(x) + " outside [0, 1]");
      }
    }
  }

  std::vector<double> differences() const {
    validate();
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
  }
};

// One-sided test of "A > B".
struct TestResult {
  double statistic = 0;
  double p = 1;
  std::size_t n = 0;  // pairs used (after dropping zero differences for Wilcoxon)
  std::string method;
  std::string direction;
};

inline constexpr std::size_t kWilcoxonMinPairs = 5;

namespace detail {

// Doubled average ranks of |d| (integers even with ties), in the order of d.
inline std::vector<std::uint32_t> doubled_ranks(std::span<const double> d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });
  std::vector<std::uint32_t> r(d.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    // Positions i..j (0-based) share the rank ((i+1)+(j+1))/2.
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = static_cast<std::uint32_t>(i + j + 2);
    i = j + 1;
  }
  return r;
}

}  // namespace detail

// Exact one-tailed Wilcoxon signed-rank test on differences d = A - B.
// p = P(W+ >= observed) under the null that every sign is equally likely, counted
// over all 2^n sign assignments with a subset-sum table on doubled ranks.
inline TestResult wilcoxon_one_tailed(std::span<const double> diffs) {
  std::vector<double> d;
  for (double x : diffs) {
    if (!std::isfinite(x)) throw StatsError("wilcoxon: non-finite difference");
    if (x != 0) d.push_back(x);
  }
  if (d.empty() && !diffs.empty()) throw StatsError("wilcoxon: all differences are zero");
  if (d.size() < kWilcoxonMinPairs) {
    throw StatsError("wilcoxon: " + std::to_string(d.size()) + " non-zero differences, at least 5 required");
  }
  const auto r = detail::doubled_ranks(d);
  std::uint64_t observed = 0, total = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    total += r[i];
    if (d[i] > 0) observed += r[i];
  }
  const std::size_t n = d.size();
  double p;
  if (n <= 62) {
    std::vector<std::uint64_t> count(total + 1, 0);
    count[0] = 1;
    std::uint64_t reach = 0;
    for (auto ri : r) {
      reach += ri;
      for (std::uint64_t s = reach; s >= ri; --s) count[s] += count[s - ri];
    }
    std::uint64_t tail = 0;
    for (std::uint64_t s = observed; s <= total; ++s) tail += count[s];
    p = std::ldexp(static_cast<double>(tail), -static_cast<int>(n));
  } else {
    std::vector<double> prob(total + 1, 0.0);
    prob[0] = 1;
    std::uint64_t reach = 0;
    for (auto ri : r) {
      reach += ri;
      for (std::uint64_t s = reach; s >= ri; --s) prob[s] = 0.5 * prob[s] + 0.5 * prob[s - ri];
      for (std::uint64_t s = std::min<std::uint64_t>(ri, reach + 1); s-- > 0;) prob[s] *= 0.5;
    }
    p = 0;
    for (std::uint64_t s = observed; s <= total; ++s) p += prob[s];
  }
  return {static_cast<double>(observed) / 2, std::clamp(p, 0.0, 1.0), n, "wilcoxon signed-rank, exact", "A > B"};
}

inline TestResult wilcoxon_one_tailed(const PairedScores& pairs) {
  auto r = wilcoxon_one_tailed(std::span<const double>(pairs.differences()));
  r.direction = pairs.label_a + " > " + pairs.label_b;
  return r;
}

// Regularized incomplete beta I_x(a, b) by the modified Lentz continued fraction.
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw DomainError("incomplete_beta: a and b must be positive");
  if (!(x >= 0 && x <= 1)) throw DomainError("incomplete_beta: x must lie in [0, 1]");
  if (x == 0 || x == 1) return x;
  if (x > (a + 1) / (a + b + 2)) return 1 - incomplete_beta(b, a, 1 - x);
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  constexpr double tiny = 1e-300;
  double c = 1, dd = 1 - (a + b) * x / (a + 1);
  if (std::abs(dd) < tiny) dd = tiny;
  dd = 1 / dd;
  double h = dd;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1) * (a + m2));
    dd = 1 + num * dd;
    if (std::abs(dd) < tiny) dd = tiny;
    c = 1 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    dd = 1 / dd;
    h *= dd * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1));
    dd = 1 + num * dd;
    if (std::abs(dd) < tiny) dd = tiny;
    c = 1 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    dd = 1 / dd;
    const double delta = dd * c;
    h *= delta;
    if (std::abs(delta - 1) < 1e-15) return std::exp(log_front) * h / a;
  }
  throw NumericalError("incomplete_beta: continued fraction did not converge");
}

// P(T > t) for Student's t with df degrees of freedom.
inline double student_t_upper(double t, double df) {
  if (!(df > 0)) throw DomainError("student_t_upper: df must be positive");
  if (std::isnan(t)) throw DomainError("student_t_upper: t is NaN");
  const double half = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t >= 0 ? half : 1 - half;
}

namespace detail {

inline void difference_moments(std::span<const double> d, const char* who, double& mean, double& sd) {
  if (d.size() < 2) throw StatsError(std::string(who) + ": at least 2 pairs required");
  for (double x : d) {
    if (!std::isfinite(x)) throw StatsError(std::string(who) + ": non-finite difference");
  }
  mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  double ss = 0;
  for (double x : d) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(d.size() - 1));
  if (!(sd > 0)) throw StatsError(std::string(who) + ": degenerate differences (zero variance)");
}

}  // namespace detail

inline TestResult paired_t_one_tailed(std::span<const double> d) {
  double mean, sd;
  detail::difference_moments(d, "paired t", mean, sd);
  const double n = static_cast<double>(d.size());
  const double t = mean / (sd / std::sqrt(n));
  return {t, std::clamp(student_t_upper(t, n - 1), 0.0, 1.0), d.size(), "paired t, one-sided", "A > B"};
}

inline TestResult paired_t_one_tailed(const PairedScores& pairs) {
  auto r = paired_t_one_tailed(std::span<const double>(pairs.differences()));
  r.direction = pairs.label_a + " > " + pairs.label_b;
  return r;
}

// Ratio f(t; df, mu) / f(t; df, 0) of the noncentral to the central t density.
// Both are integrals of s^df exp(-df s^2 / 2) phi(t s - mu) over s > 0; the central
// one has a closed form, the noncentral one is integrated around its mode.
inline double noncentral_t_density_ratio(double t, double df, double mu) {
  const double a = df + t * t;
  auto log_h = [&](double s) { return df * std::log(s) - 0.5 * (a * s * s - 2 * t * mu * s + mu * mu); };
  const double mode = (t * mu + std::sqrt(t * t * mu * mu + 4 * a * df)) / (2 * a);
  const double peak = log_h(mode);
  // s = mode * x / (1 - x) maps (0, 1) onto (0, inf).
  auto integrand = [&](double x) {
    if (x <= 0 || x >= 1) return 0.0;
    const double s = mode * x / (1 - x);
    const double v = std::exp(log_h(s) - peak) * mode / ((1 - x) * (1 - x));
    return std::isfinite(v) ? v : 0.0;
  };
  const double num = integrate(integrand, 0.0, 1.0, 1e-10, 0.0, 4000).value;
  const double log_den = std::lgamma(0.5 * (df + 1)) + 0.5 * (df - 1) * std::log(2.0) - 0.5 * (df + 1) * std::log(a);
  return std::exp(peak + std::log(num) - log_den);
}

// One-sided JZS Bayes factor BF+0 for a paired design: Cauchy(0, r) prior on the
// standardized effect, truncated to effects > 0, against the point null.
// With delta = r tan(theta) the half-Cauchy becomes uniform on (0, pi/2).
inline double jzs_bayes_factor(double t, std::size_t n, double r = std::numbers::sqrt2 / 2) {
  if (n < 2) throw StatsError("bayes factor: at least 2 pairs required");
  if (!(r > 0)) throw ConfigError("bayes_scale: must be positive");
  if (!std::isfinite(t)) throw StatsError("bayes factor: t is not finite");
  const double df = static_cast<double>(n - 1), root_n = std::sqrt(static_cast<double>(n));
  auto integrand = [&](double theta) {
    if (theta >= std::numbers::pi / 2) return 0.0;
    return noncentral_t_density_ratio(t, df, root_n * r * std::tan(theta));
  };
  const auto q = integrate(integrand, 0.0, std::numbers::pi / 2, 1e-6);
  return q.value * 2 / std::numbers::pi;
}

inline double jzs_bayes_factor(std::span<const double> d, double r = std::numbers::sqrt2 / 2) {
  const auto t = paired_t_one_tailed(d);
  return jzs_bayes_factor(t.statistic, t.n, r);
}

}  // namespace turnkan::stats
