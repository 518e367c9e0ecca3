#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "turnkan/metrics/class_weights.hpp"
#include "turnkan/metrics/confusion.hpp"

using namespace turnkan;
using namespace turnkan::metrics;

namespace {

constexpr Label SW = Label::SW, ST = Label::ST, SP = Label::SP;

ConfusionMatrix from_rows(std::array<std::array<std::uint64_t, 3>, 3> rows) {
  ConfusionMatrix cm;
  cm.counts = rows;
  return cm;
}

// Per-sample reference: F1 from TP/FP/FN counted directly on the label lists.
double reference_macro_f1(const std::vector<Label>& t, const std::vector<Label>& p) {
  double total = 0;
  for (Label k : kLabels) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      tp += t[i] == k && p[i] == k;
      fp += t[i] != k && p[i] == k;
      fn += t[i] == k && p[i] != k;
    }
    total += (2 * tp + fp + fn) > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
  }
  return total / 3;
}

std::vector<Label> random_labels(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> u(0, 2);
  std::vector<Label> out(n);
  for (auto& l : out) l = label_from_index(u(rng));
  return out;
}

}  // namespace

TEST(Confusion, HandCountedExample) {
  const std::vector<Label> t{SW, SW, ST, SP}, p{SW, ST, ST, SW};
  const auto cm = confusion(t, p);
  EXPECT_EQ(cm, from_rows({{{1, 1, 0}, {0, 1, 0}, {1, 0, 0}}}));
}

TEST(Confusion, PerfectIsDiagonalAndAllSwIsFirstColumn) {
  const std::vector<Label> t{SW, ST, SP, SP, ST};
  const auto cm = confusion(t, t);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(cm.counts[r][c] != 0, r == c);
  const std::vector<Label> all_sw(t.size(), SW);
  const auto cm2 = confusion(t, all_sw);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(cm2.counts[r][1] + cm2.counts[r][2], 0u);
    EXPECT_EQ(cm2.counts[r][0], cm2.support(r));
  }
  EXPECT_DOUBLE_EQ(macro_f1(cm), 1.0);
}

TEST(Confusion, RejectsMismatchedOrEmpty) {
  const std::vector<Label> a{SW, ST}, b{SW};
  EXPECT_THROW(confusion(a, b), DataError);
  EXPECT_THROW(confusion(std::vector<Label>{}, std::vector<Label>{}), DataError);
}

TEST(Confusion, RowNormalizedRowsSumToOne) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto t = random_labels(rng, 1 + rep);
    const auto p = random_labels(rng, 1 + rep);
    const auto cm = confusion(t, p);
    const auto rn = cm.row_normalized();
    for (std::size_t r = 0; r < 3; ++r) {
      const double s = rn[r][0] + rn[r][1] + rn[r][2];
      if (cm.support(r) > 0) EXPECT_NEAR(s, 1.0, 1e-12);
      else EXPECT_EQ(s, 0.0);
    }
    EXPECT_EQ(cm.total(), t.size());
  }
}

TEST(MacroF1, HandComputedExample) {
  const auto cm = from_rows({{{8, 1, 1}, {2, 7, 1}, {1, 1, 8}}});
  // SW: P=8/11 R=8/10, ST: P=7/9 R=7/10, SP: P=8/10 R=8/10
  const auto f = [](double p, double r) { return 2 * p * r / (p + r); };
  const double expected = (f(8.0 / 11, 0.8) + f(7.0 / 9, 0.7) + f(0.8, 0.8)) / 3;
  EXPECT_NEAR(macro_f1(cm), expected, 1e-14);
  EXPECT_NEAR(macro_f1(cm), 0.7659, 1e-3);
}

TEST(MacroF1, IgnoredClassContributesZero) {
  // SP never predicted and never a true positive.
  const std::vector<Label> t{SW, SW, ST, SP}, p{SW, SW, ST, ST};
  const auto cm = confusion(t, p);
  EXPECT_EQ(class_scores(cm, 2).f1, 0.0);
  EXPECT_NEAR(macro_f1(cm), (1.0 + 2.0 / 3.0 + 0.0) / 3, 1e-15);
}

TEST(MacroF1, MatchesPerSampleReferenceAndStaysInUnitInterval) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const auto t = random_labels(rng, 1 + rep % 40);
    auto p = t;
    for (auto& l : p) {
      if (rng() % 3 == 0) l = label_from_index(rng() % 3);
    }
    const double f = macro_f1(t, p);
    EXPECT_NEAR(f, reference_macro_f1(t, p), 1e-12);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(MacroF1, InvariantUnderConsistentRelabeling) {
  std::mt19937_64 rng(3);
  std::array<int, 3> perm{0, 1, 2};
  for (int rep = 0; rep < 100; ++rep) {
    const auto t = random_labels(rng, 30);
    const auto p = random_labels(rng, 30);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto relabel = [&](std::vector<Label> v) {
      for (auto& l : v) l = label_from_index(perm[index_of(l)]);
      return v;
    };
    EXPECT_NEAR(macro_f1(t, p), macro_f1(relabel(t), relabel(p)), 1e-12);
  }
}

TEST(ClassWeights, DirectSubstitution) {
  const std::vector<std::uint64_t> counts{60, 30, 10};
  const auto w = class_weights(counts, 3);
  EXPECT_NEAR(w.weights[0], 0.5556, 1e-4);
  EXPECT_NEAR(w.weights[1], 1.1111, 1e-4);
  EXPECT_NEAR(w.weights[2], 3.3333, 1e-4);
}

TEST(ClassWeights, BalancedCountsGiveOnes) {
  for (std::uint64_t n : {1u, 7u, 1000u}) {
    const std::vector<std::uint64_t> counts{n, n, n};
    for (double w : class_weights(counts, 3).weights) EXPECT_EQ(w, 1.0);
  }
}

TEST(ClassWeights, TrainingProportionsOfFirstSubject) {
  // Training proportions 75.6 / 15.1 / 9.2 percent as integer counts.
  const std::vector<std::uint64_t> counts{7560, 1510, 920};
  const auto w = class_weights(counts, 3);
  const double n = 9990;
  EXPECT_NEAR(w.weights[0], n / (3 * 7560.0), 1e-15);
  EXPECT_NEAR(w.weights[1], n / (3 * 1510.0), 1e-15);
  EXPECT_NEAR(w.weights[2], n / (3 * 920.0), 1e-15);
  // The reference percentages sum to 99.9, so weights from real counts sit
  // about 0.1 % below 1 / (3 p); compare with a relative tolerance of 1.1e-3.
  EXPECT_NEAR(w.weights[0] / 0.4409, 1.0, 1.1e-3);
  EXPECT_NEAR(w.weights[1] / 2.2075, 1.0, 1.1e-3);
  EXPECT_NEAR(w.weights[2] / 3.6232, 1.0, 1.1e-3);
}

TEST(ClassWeights, WeightedTotalIsExactlyN) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::uint64_t> u(1, 1'000'000);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::vector<std::uint64_t> counts{u(rng), u(rng), u(rng)};
    const auto w = class_weights(counts, 3);
    const auto [num, den] = w.weighted_total_exact();
    EXPECT_EQ(den, 1u);
    EXPECT_EQ(num, counts[0] + counts[1] + counts[2]);
    EXPECT_NEAR(w.weighted_total(), static_cast<double>(w.total), 1e-9 * static_cast<double>(w.total));
  }
}

TEST(ClassWeights, SmallerClassGetsLargerWeight) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> u(1, 500);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::vector<std::uint64_t> counts{u(rng), u(rng), u(rng)};
    const auto w = class_weights(counts, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (counts[a] < counts[b]) {
          EXPECT_GT(w.weights[a], w.weights[b]);
        }
  }
}

TEST(ClassWeights, RejectsZeroCount) {
  const std::vector<std::uint64_t> counts{5, 0, 3};
  EXPECT_THROW(class_weights(counts, 3), DataError);
  const std::vector<std::uint64_t> two{5, 3};
  EXPECT_THROW(class_weights(two, 3), DataError);
}
