#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "turnkan/metrics/class_weights.hpp"
#include "turnkan/models/model.hpp"
#include "turnkan/numcore/adam.hpp"

namespace turnkan::models {

inline std::vector<int> label_indices(std::span<const Label> labels) {
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = static_cast<int>(index_of(labels[i]));
  return out;
}

// Mean over the batch of w[y] * -log softmax(logits)[y].
inline Var weighted_cross_entropy(Var logits, std::span<const Label> labels, const metrics::ClassWeights& weights) {
  if (weights.weights.size() != kNumClasses) {
    throw DataError("weighted_cross_entropy: weights must cover all " + std::to_string(kNumClasses) + " classes");
  }
  const auto ys = label_indices(labels);
  return num::weighted_softmax_cross_entropy(logits, ys, weights.weights);
}

inline metrics::ClassWeights weights_for(std::span<const Label> labels) {
  std::vector<std::uint64_t> counts(kNumClasses, 0);
  for (Label l : labels) ++counts[index_of(l)];
  return metrics::class_weights(counts, kNumClasses);
}

struct TrainOptions {
  std::uint64_t seed = 0;
  std::optional<double> learning_rate;  // overrides the config value
  std::optional<int> epochs;            // overrides the config value
  bool fit_normalization = true;
};

// Full-batch Adam on the weighted cross-entropy plus the family's penalty.
// history receives the loss of every epoch before its update.
inline Model train(Model model, const WindowBatch& data, const metrics::ClassWeights& weights, const TrainOptions& opts = {}) {
  const ModelConfig& c = model.config();
  if (data.size() == 0) throw DataError("train: no training windows");
  {
    std::vector<bool> seen(kNumClasses, false);
    for (Label l : data.labels) seen[index_of(l)] = true;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      if (!seen[k]) throw DataError("train: no window of class " + std::string(to_string(label_from_index(k))));
    }
  }
  if (opts.fit_normalization) model.set_normalization(fit_normalization(data.inputs));
  const int epochs = opts.epochs.value_or(c.epochs);
  num::Adam adam({.learning_rate = opts.learning_rate.value_or(c.learning_rate)});
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto ys = label_indices(data.labels);
  const bool use_dropout = is_convolutional(c.family);
  model.history().clear();

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (auto& p : model.parameters()) p.zero_grad();
    num::Tape tape;
    Var logits = model.forward(tape, data.inputs, use_dropout ? &rng : nullptr);
    Var loss = num::add(num::weighted_softmax_cross_entropy(logits, ys, weights.weights), model.penalty(tape));
    const double value = loss.value().item();
    if (!std::isfinite(value)) throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch));
    model.history().push_back(value);
    tape.backward(loss);
    try {
      adam.step(model.parameters());
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch));
    }
  }
  return model;
}

}  // namespace turnkan::models
