#pragma once

#include <array>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "turnkan/data/trial.hpp"
#include "turnkan/data/windows.hpp"
#include "turnkan/errors.hpp"
#include "turnkan/random.hpp"

namespace turnkan::data {

inline constexpr std::size_t kTestStraightTrials = 3;
inline constexpr std::size_t kDivisions = 10;

// Trial-level train/test partition of one subject; indices refer to the input trial list.
struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Test set: one random trial per (turn type, stiffness) cell plus three random
// straight trials. L-tests and everything else train.
inline DataSplit split_trials(std::span<const Trial> trials, std::uint64_t seed) {
  std::map<std::pair<Activity, Stiffness>, std::vector<std::size_t>> cells;
  std::vector<std::size_t> straight;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& t = trials[i];
    if (is_turn(t.activity)) cells[{t.activity, t.stiffness}].push_back(i);
    if (t.activity == Activity::Straight) straight.push_back(i);
  }
  rnd::Engine g(rnd::mix(seed, 0x5b117));
  std::vector<bool> in_test(trials.size(), false);
  for (Activity a : kTurnTypes) {
    for (Stiffness s : kStiffnesses) {
      const auto it = cells.find({a, s});
      if (it == cells.end()) {
        throw DataError("split: no trial for cell (" + std::string(to_string(a)) + ", " + std::string(to_string(s)) + ")");
      }
      in_test[it->second[rnd::below(g, it->second.size())]] = true;
    }
  }
  if (straight.size() < kTestStraightTrials + 1) {
    throw DataError("split: at least 4 straight trials required, found " + std::to_string(straight.size()));
  }
  rnd::shuffle(straight, g);
  for (std::size_t i = 0; i < kTestStraightTrials; ++i) in_test[straight[i]] = true;
  DataSplit out;
  for (std::size_t i = 0; i < trials.size(); ++i) (in_test[i] ? out.test : out.train).push_back(i);
  return out;
}

// Ten disjoint stratified folds over a set of windows.
struct Divisions {
  std::vector<std::vector<std::size_t>> folds;  // window indices, ascending
  std::string checksum;                         // identifies the assignment
};

inline std::string assignment_checksum(std::span<const Window> windows, const std::vector<std::vector<std::size_t>>& folds) {
  rnd::Fnv1a h;
  h.add(windows.size());
  for (const auto& fold : folds) {
    h.add(fold.size());
    for (std::size_t i : fold) {
      h.add(i);
      h.add(windows[i].trial);
      h.add(windows[i].start);
      h.add(windows[i].values.size());
      h.add(index_of(windows[i].label));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h.value());
  return buf;
}

// Per class, a seeded shuffle is dealt round-robin; each class starts where the
// previous one stopped so fold totals stay balanced as well.
inline Divisions ten_divisions(std::span<const Window> windows, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < windows.size(); ++i) by_class[index_of(windows[i].label)].push_back(i);
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (by_class[k].size() < kDivisions) {
      throw DataError("divisions: class " + std::string(to_string(label_from_index(k))) + " has " +
                      std::to_string(by_class[k].size()) + " test windows, at least 10 required");
    }
  }
  rnd::Engine g(rnd::mix(seed, 0xd1715));
  Divisions d;
  d.folds.resize(kDivisions);
  std::size_t offset = 0;
  for (auto& idx : by_class) {
    rnd::shuffle(idx, g);
    for (std::size_t j = 0; j < idx.size(); ++j) d.folds[(offset + j) % kDivisions].push_back(idx[j]);
    offset = (offset + idx.size()) % kDivisions;
  }
  for (auto& f : d.folds) std::sort(f.begin(), f.end());
  d.checksum = assignment_checksum(windows, d.folds);
  return d;
}

// Stratified hold-out of `fraction` of the windows of every class (at least one each).
struct Holdout {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

inline Holdout stratified_holdout(std::span<const Window> windows, double fraction, std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) throw ConfigError("validation_fraction: must lie in (0, 1)");
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < windows.size(); ++i) by_class[index_of(windows[i].label)].push_back(i);
  rnd::Engine g(rnd::mix(seed, 0x7a11d));
  Holdout h;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    auto& idx = by_class[k];
    if (idx.size() < 2) {
      throw DataError("holdout: class " + std::string(to_string(label_from_index(k))) +
                      " needs at least 2 windows for a validation split");
    }
    rnd::shuffle(idx, g);
    std::size_t nval = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    nval = std::clamp<std::size_t>(nval, 1, idx.size() - 1);
    h.validation.insert(h.validation.end(), idx.begin(), idx.begin() + static_cast<long>(nval));
    h.train.insert(h.train.end(), idx.begin() + static_cast<long>(nval), idx.end());
  }
  std::sort(h.train.begin(), h.train.end());
  std::sort(h.validation.begin(), h.validation.end());
  return h;
}

}  // namespace turnkan::data
