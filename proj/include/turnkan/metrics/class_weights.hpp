#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "turnkan/errors.hpp"

namespace turnkan::metrics {

// w_k = n / (#C * n_k). The rational form (n, #C * n_k) is kept alongside the
// double so that identities over the weights can be checked in integers.
struct ClassWeights {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t num_classes = 0;
  std::vector<double> weights;

  std::uint64_t numerator() const { return total; }
  std::uint64_t denominator(std::size_t k) const { return num_classes * counts[k]; }

  // sum_k w_k * n_k as the reduced fraction (num, den), computed without rounding.
  std::pair<std::uint64_t, std::uint64_t> weighted_total_exact() const {
    unsigned __int128 num = 0, den = 1;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      // w_k * n_k = n * n_k / (#C * n_k)
      unsigned __int128 tn = static_cast<unsigned __int128>(total) * counts[k];
      unsigned __int128 td = static_cast<unsigned __int128>(num_classes) * counts[k];
      num = num * td + tn * den;
      den = den * td;
      const auto g = gcd128(num, den);
      num /= g;
      den /= g;
    }
    return {static_cast<std::uint64_t>(num), static_cast<std::uint64_t>(den)};
  }

  double weighted_total() const {
    double s = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) s += weights[k] * static_cast<double>(counts[k]);
    return s;
  }

 private:
  static unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
    while (b != 0) {
      const auto t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
};

inline ClassWeights class_weights(std::span<const std::uint64_t> counts, std::uint64_t num_classes) {
  if (num_classes == 0 || counts.size() != num_classes) {
    throw DataError("class_weights: expected " + std::to_string(num_classes) + " class counts, got " +
                    std::to_string(counts.size()));
  }
  ClassWeights w;
  w.counts.assign(counts.begin(), counts.end());
  w.num_classes = num_classes;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) throw DataError("class_weights: class " + std::to_string(k) + " has no samples");
    w.total += counts[k];
  }
  w.weights.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    w.weights[k] = static_cast<double>(w.total) / static_cast<double>(num_classes * counts[k]);
  }
  return w;
}

inline ClassWeights uniform_weights(std::uint64_t num_classes) {
  std::vector<std::uint64_t> ones(num_classes, 1);
  return class_weights(ones, num_classes);
}

}  // namespace turnkan::metrics
