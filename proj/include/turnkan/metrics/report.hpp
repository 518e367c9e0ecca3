#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "turnkan/errors.hpp"
#include "turnkan/metrics/confusion.hpp"

namespace turnkan::metrics {

// Test-set evaluation of one model: overall scores plus one macro-F1 per division.
struct EvalReport {
  ConfusionMatrix confusion;
  double macro_f1 = 0;
  std::array<ClassScores, kNumClasses> per_class{};
  std::vector<double> division_f1;
  std::string division_checksum;
};

// `divisions` are index sets into y_true / y_pred (typically the ten stratified folds).
inline EvalReport evaluate(std::span<const Label> y_true, std::span<const Label> y_pred,
                           const std::vector<std::vector<std::size_t>>& divisions = {}, std::string checksum = "") {
  EvalReport r;
  r.confusion = confusion(y_true, y_pred);
  r.macro_f1 = macro_f1(r.confusion);
  for (std::size_t k = 0; k < kNumClasses; ++k) r.per_class[k] = class_scores(r.confusion, k);
  for (const auto& fold : divisions) {
    std::vector<Label> t, p;
    for (std::size_t i : fold) {
      if (i >= y_true.size()) throw DataError("evaluate: division index " + std::to_string(i) + " out of range");
      t.push_back(y_true[i]);
      p.push_back(y_pred[i]);
    }
    r.division_f1.push_back(macro_f1(t, p));
  }
  r.division_checksum = std::move(checksum);
  return r;
}

}  // namespace turnkan::metrics
