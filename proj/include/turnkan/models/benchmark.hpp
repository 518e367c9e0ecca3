#pragma once

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include "turnkan/models/model.hpp"

namespace turnkan::models {

// Median wall-clock seconds of a single-window predict. Each repetition
// predicts every window once, one at a time, and contributes its mean
// per-window time; a warm-up pass is excluded.
inline double benchmark_inference(Model& model, const Tensor& windows, int repetitions) {
  if (repetitions < 30) throw ConfigError("repetitions: at least 30 required");
  if (windows.rank() != 3 || windows.dim(0) == 0) throw ShapeError("benchmark_inference: windows must be [N,W,6]");
  const std::size_t N = windows.dim(0);
  const std::size_t per = windows.dim(1) * windows.dim(2);
  std::vector<std::vector<double>> single(N);
  for (std::size_t n = 0; n < N; ++n) single[n].assign(windows.data().begin() + n * per, windows.data().begin() + (n + 1) * per);

  volatile double sink = 0;
  for (const auto& w : single) sink = sink + predict(model, w)[0];

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(repetitions));
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& w : single) sink = sink + predict(model, w)[0];
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(N));
  }
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
  return samples[samples.size() / 2];
}

}  // namespace turnkan::models
