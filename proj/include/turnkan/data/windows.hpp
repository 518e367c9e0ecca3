#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "turnkan/data/trial.hpp"
#include "turnkan/errors.hpp"
#include "turnkan/models/model.hpp"

namespace turnkan::data {

// Centered moving average; near the edges the window shrinks symmetrically
// to the largest odd width that fits.
inline std::vector<double> moving_average(std::span<const double> x, std::size_t width = 7) {
  if (width % 2 == 0 || width == 0) throw ConfigError("moving_average: width must be odd");
  if (x.size() < width) {
    throw DataError("moving_average: series of length " + std::to_string(x.size()) + " shorter than " +
                    std::to_string(width));
  }
  const std::size_t half = width / 2;
  const std::size_t n = x.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = std::min({half, i, n - 1 - i});
    double s = 0;
    for (std::size_t j = i - r; j <= i + r; ++j) s += x[j];
    y[i] = s / static_cast<double>(2 * r + 1);
  }
  return y;
}

// Smooths the three acceleration channels with the 7-point moving average.
inline Trial smooth_acceleration(Trial t) {
  const std::size_t n = t.samples.size();
  std::vector<double> ch(n);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) ch[i] = t.samples[i].channels[c];
    const auto s = moving_average(ch);
    for (std::size_t i = 0; i < n; ++i) t.samples[i].channels[c] = s[i];
  }
  return t;
}

struct Window {
  std::vector<double> values;  // W x 6, row-major by sample
  Label label = Label::SW;
  std::size_t trial = 0;  // index into the trial list the window was cut from
  std::size_t start = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

inline void check_window_size(int w) {
  if (w != 10 && w != 20 && w != 30) {
    throw ConfigError("window_size: must be 10, 20 or 30, got " + std::to_string(w));
  }
}

// Sliding windows with stride W/2; each window takes the label of its last sample.
inline std::vector<Window> make_windows(const Trial& trial, int window_size, std::size_t trial_index = 0) {
  check_window_size(window_size);
  const std::size_t W = static_cast<std::size_t>(window_size);
  const std::size_t stride = W / 2;
  std::vector<Window> out;
  const std::size_t n = trial.samples.size();
  if (n < W) return out;
  out.reserve((n - W) / stride + 1);
  for (std::size_t s = 0; s + W <= n; s += stride) {
    Window w;
    w.values.reserve(W * kChannels);
    for (std::size_t i = s; i < s + W; ++i) {
      w.values.insert(w.values.end(), trial.samples[i].channels.begin(), trial.samples[i].channels.end());
    }
    w.label = trial.samples[s + W - 1].label;
    w.trial = trial_index;
    w.start = s;
    out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<Window> make_windows(std::span<const Trial> trials, int window_size,
                                        std::span<const std::size_t> trial_indices = {}) {
  std::vector<Window> out;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    auto w = make_windows(trials[i], window_size, trial_indices.empty() ? i : trial_indices[i]);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

inline std::array<std::uint64_t, kNumClasses> class_counts(std::span<const Window> windows) {
  std::array<std::uint64_t, kNumClasses> c{};
  for (const auto& w : windows) ++c[index_of(w.label)];
  return c;
}

inline std::array<double, kNumClasses> class_proportions(std::span<const Window> windows) {
  const auto c = class_counts(windows);
  std::array<double, kNumClasses> p{};
  if (windows.empty()) return p;
  for (std::size_t k = 0; k < kNumClasses; ++k) p[k] = static_cast<double>(c[k]) / static_cast<double>(windows.size());
  return p;
}

inline std::vector<Label> labels_of(std::span<const Window> windows) {
  std::vector<Label> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) out[i] = windows[i].label;
  return out;
}

// Stacks windows (all of one size) into the model input layout [N, W, 6].
inline models::WindowBatch to_batch(std::span<const Window> windows) {
  if (windows.empty()) throw DataError("to_batch: no windows");
  const std::size_t per = windows.front().values.size();
  if (per == 0 || per % kChannels != 0) throw DataError("to_batch: malformed window");
  std::vector<double> flat;
  flat.reserve(per * windows.size());
  models::WindowBatch b;
  for (const auto& w : windows) {
    if (w.values.size() != per) throw DataError("to_batch: windows of different sizes");
    flat.insert(flat.end(), w.values.begin(), w.values.end());
    b.labels.push_back(w.label);
  }
  b.inputs = num::Tensor({windows.size(), per / kChannels, kChannels}, std::move(flat));
  return b;
}

template <class Index>
std::vector<Window> select(std::span<const Window> windows, const std::vector<Index>& idx) {
  std::vector<Window> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(windows[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace turnkan::data
