#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "turnkan/errors.hpp"
#include "turnkan/labels.hpp"

namespace turnkan::metrics {

// Counts with true label on rows and prediction on columns, order (SW, ST, SP).
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t support(std::size_t row) const {
    std::uint64_t s = 0;
    for (auto c : counts[row]) s += c;
    return s;
  }

  std::uint64_t predicted(std::size_t col) const {
    std::uint64_t s = 0;
    for (const auto& r : counts) s += r[col];
    return s;
  }

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (std::size_t r = 0; r < kNumClasses; ++r) s += support(r);
    return s;
  }

  // Rows divided by their support; rows without support stay zero.
  std::array<std::array<double, kNumClasses>, kNumClasses> row_normalized() const {
    std::array<std::array<double, kNumClasses>, kNumClasses> out{};
    for (std::size_t r = 0; r < kNumClasses; ++r) {
      const auto s = support(r);
      if (s == 0) continue;
      for (std::size_t c = 0; c < kNumClasses; ++c) out[r][c] = static_cast<double>(counts[r][c]) / static_cast<double>(s);
    }
    return out;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    for (std::size_t r = 0; r < kNumClasses; ++r)
      for (std::size_t c = 0; c < kNumClasses; ++c) counts[r][c] += o.counts[r][c];
    return *this;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DataError("confusion: " + std::to_string(y_true.size()) + " true labels vs " +
                    std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw DataError("confusion: no samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) ++cm.counts[index_of(y_true[i])][index_of(y_pred[i])];
  return cm;
}

struct ClassScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Zero-denominator convention: precision, recall or F1 with a zero denominator is 0.
inline ClassScores class_scores(const ConfusionMatrix& cm, std::size_t k) {
  ClassScores s;
  const double tp = static_cast<double>(cm.counts[k][k]);
  const auto pred = cm.predicted(k);
  const auto sup = cm.support(k);
  s.precision = pred ? tp / static_cast<double>(pred) : 0.0;
  s.recall = sup ? tp / static_cast<double>(sup) : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

inline double macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("macro_f1: empty confusion matrix");
  double s = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) s += class_scores(cm, k).f1;
  return s / static_cast<double>(kNumClasses);
}

inline double macro_f1(std::span<const Label> y_true, std::span<const Label> y_pred) {
  return macro_f1(confusion(y_true, y_pred));
}

}  // namespace turnkan::metrics
