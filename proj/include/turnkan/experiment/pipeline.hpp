#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "turnkan/data/split.hpp"
#include "turnkan/data/trial.hpp"
#include "turnkan/data/windows.hpp"
#include "turnkan/metrics/report.hpp"
#include "turnkan/models/benchmark.hpp"
#include "turnkan/models/model.hpp"
#include "turnkan/models/trainer.hpp"
#include "turnkan/random.hpp"

namespace turnkan::exp {

inline std::uint64_t text_hash(const std::string& s) {
  rnd::Fnv1a h;
  for (unsigned char ch : s) h.add(ch);
  return h.value();
}

// One subject's windows at one window size: training windows, test windows and the
// ten stratified test divisions shared by every model scored on them.
struct SubjectWindows {
  std::vector<data::Window> train;
  std::vector<data::Window> test;
  data::Divisions divisions;
};

// Multi-subject dataset with a fixed trial-level split per subject. Windows are
// built on demand per window size and cached.
class Dataset {
 public:
  Dataset(std::vector<data::Trial> trials, std::uint64_t seed, bool smoothing = true) : seed_(seed) {
    if (trials.empty()) throw DataError("dataset: no trials");
    for (auto& t : trials) {
      data::validate_trial(t);
      auto& s = subjects_[t.subject];
      if (s.trials.empty()) order_.push_back(t.subject);
      s.trials.push_back(smoothing ? data::smooth_acceleration(std::move(t)) : std::move(t));
    }
    for (auto& [name, s] : subjects_) s.split = data::split_trials(s.trials, rnd::mix(seed_, text_hash(name)));
  }

  const std::vector<std::string>& subjects() const { return order_; }
  bool has(const std::string& subject) const { return subjects_.count(subject) > 0; }

  const data::DataSplit& split(const std::string& subject) const { return entry(subject).split; }

  const SubjectWindows& windows(const std::string& subject, int window_size) {
    auto& s = entry(subject);
    auto& slot = s.windows[window_size];
    if (!slot) {
      auto w = std::make_unique<SubjectWindows>();
      auto cut = [&](const std::vector<std::size_t>& idx) {
        std::vector<data::Trial> part;
        for (auto i : idx) part.push_back(s.trials[i]);
        return data::make_windows(part, window_size, idx);
      };
      w->train = cut(s.split.train);
      w->test = cut(s.split.test);
      try {
        w->divisions = data::ten_divisions(w->test, rnd::mix(seed_, text_hash(subject) + static_cast<std::uint64_t>(window_size)));
      } catch (const DataError& e) {
        throw DataError("subject " + subject + ": " + e.what());
      }
      slot = std::move(w);
    }
    return *slot;
  }

  // Training windows of every subject, in subject order.
  std::vector<data::Window> pooled_train(int window_size) {
    std::vector<data::Window> out;
    for (const auto& s : order_) {
      const auto& w = windows(s, window_size).train;
      out.insert(out.end(), w.begin(), w.end());
    }
    return out;
  }

 private:
  struct Entry {
    std::vector<data::Trial> trials;
    data::DataSplit split;
    std::map<int, std::unique_ptr<SubjectWindows>> windows;
  };

  Entry& entry(const std::string& subject) {
    auto it = subjects_.find(subject);
    if (it == subjects_.end()) throw DataError("dataset: no subject '" + subject + "'");
    return it->second;
  }
  const Entry& entry(const std::string& subject) const {
    auto it = subjects_.find(subject);
    if (it == subjects_.end()) throw DataError("dataset: no subject '" + subject + "'");
    return it->second;
  }

  std::uint64_t seed_;
  std::map<std::string, Entry> subjects_;
  std::vector<std::string> order_;
};

struct Fitted {
  models::Model model;
  double train_seconds = 0;
  std::size_t train_windows = 0;
};

// Class-weighted full-batch training on `train`; weights follow the training labels.
inline Fitted fit(const models::ModelConfig& config, std::span<const data::Window> train, std::uint64_t seed) {
  if (train.empty()) throw DataError("train: no training windows");
  const auto batch = data::to_batch(train);
  const auto weights = models::weights_for(batch.labels);
  const auto t0 = std::chrono::steady_clock::now();
  Fitted f;
  f.model = models::train(models::build_model(config, seed), batch, weights, {.seed = rnd::mix(seed, 0x7a1)});
  f.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  f.train_windows = train.size();
  return f;
}

inline metrics::EvalReport assess(models::Model& model, const SubjectWindows& w) {
  if (w.test.empty()) throw DataError("evaluate: no test windows");
  const auto batch = data::to_batch(w.test);
  const auto pred = models::predict_labels(model, batch.inputs);
  return metrics::evaluate(batch.labels, pred, w.divisions.folds, w.divisions.checksum);
}

// Median per-window latency over the first `max_windows` test windows.
inline double inference_latency(models::Model& model, std::span<const data::Window> windows, int repetitions,
                                std::size_t max_windows = 32) {
  const auto n = std::min(max_windows, windows.size());
  return models::benchmark_inference(model, data::to_batch(windows.first(n)).inputs, repetitions);
}

}  // namespace turnkan::exp
