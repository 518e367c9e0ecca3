#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "turnkan/errors.hpp"

namespace turnkan::hopt {

inline double matern52(double r, double length) {
  const double s = std::sqrt(5.0) * r / length;
  return (1 + s + s * s / 3) * std::exp(-s);
}

// Zero-mean GP on standardized targets, unit signal variance, Matern-5/2 with one
// length scale per input coordinate. A shared length scale is first picked from a
// fixed grid by marginal likelihood, then each coordinate's scale is refined by
// coordinate ascent over multiples of it.
class GaussianProcess {
 public:
  explicit GaussianProcess(double noise = 1e-6) : noise_(noise) {}

  void fit(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
    if (xs.empty() || xs.size() != ys.size()) throw ConfigError("gp: need matching, non-empty inputs and targets");
    x_ = xs;
    const auto n = static_cast<Eigen::Index>(ys.size());
    const std::size_t d = xs.front().size();
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
    mean_ = y.mean();
    scale_ = n > 1 ? std::sqrt((y.array() - mean_).square().sum() / static_cast<double>(n - 1)) : 1.0;
    if (!(scale_ > 0)) scale_ = 1.0;
    y_ = (y.array() - mean_) / scale_;

    // Squared coordinate differences, one n x n matrix per input coordinate.
    sq_.assign(d, Eigen::MatrixXd(n, n));
    for (std::size_t k = 0; k < d; ++k)
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) sq_[k](i, j) = (x_[i][k] - x_[j][k]) * (x_[i][k] - x_[j][k]);

    const double root_d = std::sqrt(static_cast<double>(d));
    double best = -std::numeric_limits<double>::infinity();
    for (double f : {0.05, 0.1, 0.15, 0.2, 0.3, 0.45, 0.7, 1.0, 1.5}) {
      const std::vector<double> l(d, f * root_d);
      const double v = try_lengths(l);
      if (v > best) {
        best = v;
        length_ = f * root_d;
        lengths_ = l;
      }
    }
    if (!std::isfinite(best)) throw NumericalError("gp: covariance matrix is not positive definite");
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (std::size_t k = 0; k < d; ++k) {
        auto l = lengths_;
        for (double m : {0.25, 0.5, 1.0, 2.0, 4.0, 16.0}) {
          l[k] = length_ * m;
          const double v = try_lengths(l);
          if (v > best + 1e-9) {
            best = v;
            lengths_ = l;
          }
        }
      }
    }
    try_lengths(lengths_);
    log_marginal_ = best - 0.5 * static_cast<double>(n) * std::log(2 * std::numbers::pi);
    sq_.clear();
  }

  // Posterior mean and standard deviation in target units.
  std::pair<double, double> predict(const std::vector<double>& x) const {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks(i) = matern52(distance(x, x_[i]), 1.0);
    const double mu = ks.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    const double var = std::max(1.0 - v.squaredNorm(), 0.0);
    return {mean_ + scale_ * mu, scale_ * std::sqrt(var)};
  }

  // Shared length scale chosen before per-coordinate refinement.
  double length_scale() const { return length_; }
  const std::vector<double>& length_scales() const { return lengths_; }
  double log_marginal_likelihood() const { return log_marginal_; }

 private:
  // Log marginal likelihood (without the constant) for the given length scales; on
  // success the factorization is kept. Returns -inf when the matrix cannot be factored.
  double try_lengths(const std::vector<double>& l) {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < l.size(); ++k) r2 += sq_[k] / (l[k] * l[k]);
    Eigen::MatrixXd k = r2.unaryExpr([](double v) { return matern52(std::sqrt(v), 1.0); });
    k.diagonal().array() += noise_;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    double jitter = noise_;
    while (llt.info() != Eigen::Success && jitter < 1e-2) {
      jitter *= 10;
      k.diagonal().array() += jitter;
      llt.compute(k);
    }
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    Eigen::VectorXd alpha = llt.solve(y_);
    const double logdet = 2 * llt.matrixLLT().diagonal().array().log().sum();
    llt_ = std::move(llt);
    alpha_ = std::move(alpha);
    return -0.5 * y_.dot(alpha_) - 0.5 * logdet;
  }

  double distance(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]) / (lengths_[i] * lengths_[i]);
    return std::sqrt(s);
  }

  double noise_;
  std::vector<std::vector<double>> x_;
  std::vector<Eigen::MatrixXd> sq_;
  std::vector<double> lengths_;
  Eigen::VectorXd y_, alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double mean_ = 0, scale_ = 1, length_ = 1, log_marginal_ = 0;
};

// Expected improvement over `best` for maximization.
inline double expected_improvement(double mean, double sd, double best) {
  const double gain = mean - best;
  if (!(sd > 0)) return std::max(gain, 0.0);
  const double z = gain / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi);
  return gain * cdf + sd * pdf;
}

}  // namespace turnkan::hopt
