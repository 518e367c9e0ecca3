#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "turnkan/data/trial.hpp"
#include "turnkan/errors.hpp"
#include "turnkan/kv.hpp"
#include "turnkan/random.hpp"

namespace turnkan::data {

// Knobs of the synthetic gait generator for one subject. Amplitudes are the
// straight-walking oscillation per channel; noise_sigma is relative to them.
// Proportions are window-level targets in percent, order (SW, ST, SP).
struct SubjectProfile {
  std::string subject = "S01";
  double cadence_hz = 0.9;
  std::array<double, kChannels> amp{3.0, 2.0, 4.0, 1.5, 2.5, 0.6};
  double noise_sigma = 0.4;
  int trials_per_cell = 4;
  int straight_trials = 12;
  int ltest_trials = 3;
  std::array<double, kNumClasses> proportions{74.0, 16.5, 9.5};
  double separation = 0.5;
  double turn_sign = 1.0;  // +1 turns left, -1 turns right

  friend bool operator==(const SubjectProfile&, const SubjectProfile&) = default;
};

inline kv::Map to_kv(const SubjectProfile& p) {
  kv::Map m;
  m["subject"] = p.subject;
  m["cadence_hz"] = kv::format_double(p.cadence_hz);
  m["amp"] = kv::join(std::vector<double>(p.amp.begin(), p.amp.end()));
  m["noise_sigma"] = kv::format_double(p.noise_sigma);
  m["trials_per_cell"] = std::to_string(p.trials_per_cell);
  m["straight_trials"] = std::to_string(p.straight_trials);
  m["ltest_trials"] = std::to_string(p.ltest_trials);
  m["proportions"] = kv::join(std::vector<double>(p.proportions.begin(), p.proportions.end()));
  m["separation"] = kv::format_double(p.separation);
  m["turn_sign"] = kv::format_double(p.turn_sign);
  return m;
}

inline void validate(const SubjectProfile& p) {
  auto fail = [](const std::string& field, const std::string& what) { throw ConfigError(field + ": " + what); };
  if (p.subject.empty() || p.subject.find_first_of(",/\n") != std::string::npos) fail("subject", "must be a plain identifier");
  if (!(p.cadence_hz > 0.2 && p.cadence_hz < 3)) fail("cadence_hz", "must lie in (0.2, 3)");
  for (double a : p.amp)
    if (!(a > 0)) fail("amp", "amplitudes must be positive");
  if (!(p.noise_sigma >= 0)) fail("noise_sigma", "must be >= 0");
  if (p.trials_per_cell < 1) fail("trials_per_cell", "must be >= 1");
  if (p.straight_trials < 4) fail("straight_trials", "must be >= 4");
  if (p.ltest_trials < 0) fail("ltest_trials", "must be >= 0");
  double sum = 0;
  for (double v : p.proportions) {
    if (!(v > 0)) fail("proportions", "every class needs a positive share");
    sum += v;
  }
  if (std::abs(sum - 100) > 0.5) fail("proportions", "must sum to 100");
  if (!(p.separation >= 0)) fail("separation", "must be >= 0");
  if (p.turn_sign != 1 && p.turn_sign != -1) fail("turn_sign", "must be 1 or -1");
}

inline SubjectProfile profile_from_kv(const kv::Map& m, SubjectProfile p = {}) {
  for (const auto& [k, v] : m) {
    if (k == "subject") p.subject = v;
    else if (k == "cadence_hz") p.cadence_hz = kv::to_double(k, v);
    else if (k == "amp" || k == "proportions") {
      const auto xs = kv::to_double_list(k, v);
      if (k == "amp") {
        if (xs.size() != kChannels) throw ConfigError("amp: expected 6 values");
        std::copy(xs.begin(), xs.end(), p.amp.begin());
      } else {
        if (xs.size() != kNumClasses) throw ConfigError("proportions: expected 3 values (SW, ST, SP)");
        std::copy(xs.begin(), xs.end(), p.proportions.begin());
      }
    } else if (k == "noise_sigma") p.noise_sigma = kv::to_double(k, v);
    else if (k == "trials_per_cell") p.trials_per_cell = static_cast<int>(kv::to_int(k, v));
    else if (k == "straight_trials") p.straight_trials = static_cast<int>(kv::to_int(k, v));
    else if (k == "ltest_trials") p.ltest_trials = static_cast<int>(kv::to_int(k, v));
    else if (k == "separation") p.separation = kv::to_double(k, v);
    else if (k == "turn_sign") p.turn_sign = kv::to_double(k, v);
    else throw ConfigError(k + ": unknown profile key");
  }
  validate(p);
  return p;
}

inline SubjectProfile load_profile(const std::filesystem::path& path) { return profile_from_kv(kv::load(path)); }

// Five default subjects whose targets sit inside the target proportion envelope.
inline std::vector<SubjectProfile> default_profiles() {
  std::vector<SubjectProfile> out;
  auto make = [&](std::string id, double cadence, std::array<double, 3> props, double scale, double separation) {
    SubjectProfile p;
    p.subject = std::move(id);
    p.cadence_hz = cadence;
    p.proportions = props;
    p.separation = separation;
    for (double& a : p.amp) a *= scale;
    out.push_back(p);
  };
  make("A01", 0.92, {74.0, 16.5, 9.5}, 1.00, 0.55);
  make("A02", 0.88, {73.5, 17.0, 9.5}, 1.10, 0.5);
  make("A03", 0.95, {72.5, 18.0, 9.5}, 0.95, 0.45);
  make("A04", 0.85, {71.5, 18.5, 10.0}, 1.05, 0.5);
  make("A05", 0.90, {71.0, 19.5, 9.5}, 0.90, 0.45);
  return out;
}

namespace detail {

// Window size at which the trial length is calibrated; the label of a window is
// its last sample, so the first W-1 samples of every trial never label a window.
inline constexpr int kCalibrationWindow = 20;
inline constexpr int kMinLeadIn = 40;
inline constexpr int kMinTail = 20;
inline constexpr double kLengthJitter = 0.05;

struct Layout {
  int length;       // samples per trial
  double swing;     // nominal SP samples
  double stance;    // nominal ST samples
};

inline Layout layout(const SubjectProfile& p) {
  const double stride = kSampleRateHz / p.cadence_hz;
  const double swing = 0.4 * stride;
  const double stance = swing * p.proportions[1] / p.proportions[2];
  const double turning = 9.0 * p.trials_per_cell + p.ltest_trials;
  const double total = turning + p.straight_trials;
  const double p_turn = (p.proportions[1] + p.proportions[2]) / 100.0;
  // Pooled turn share (swing+stance) / (labelled samples) equals p_turn.
  const double labelled = turning * (swing + stance) / (p_turn * total);
  const int length = static_cast<int>(std::lround(labelled)) + kCalibrationWindow - 1;
  const double worst_turn = (swing + stance) * (1 + kLengthJitter);
  if (length - worst_turn < kMinLeadIn + kMinTail + kCalibrationWindow) {
    throw DataError("profile " + p.subject + ": proportions infeasible for the requested trial counts (trial length " +
                    std::to_string(length) + " cannot hold a turn of " + std::to_string(std::lround(worst_turn)) +
                    " samples plus straight walking)");
  }
  return {length, swing, stance};
}

inline double turn_gain(Activity a) {
  switch (a) {
    case Activity::Spin90: return 1.0;
    case Activity::Step90: return 0.85;
    case Activity::Pivot180: return 1.35;
    case Activity::LTest: return 1.2;
    case Activity::Straight: return 0.0;
  }
  return 0.0;
}

// 1 inside [0, n) with raised-cosine ramps of `ramp` samples at both ends.
inline double envelope(int i, int n, int ramp) {
  if (i < 0 || i >= n) return 0.0;
  const int r = std::min(ramp, n / 2);
  if (r == 0) return 1.0;
  auto rise = [r](int k) { return 0.5 - 0.5 * std::cos(std::numbers::pi * (k + 0.5) / r); };
  if (i < r) return rise(i);
  if (i >= n - r) return rise(n - 1 - i);
  return 1.0;
}

inline Trial synth_trial(const SubjectProfile& p, const Layout& lay, Activity act, Stiffness stiff, int index, rnd::Engine& g) {
  Trial t;
  t.subject = p.subject;
  t.activity = act;
  t.stiffness = stiff;
  t.index = index;
  const int n = lay.length;
  t.samples.resize(static_cast<std::size_t>(n));

  const double cadence = p.cadence_hz * (1 + 0.05 * rnd::uniform(g, -1, 1));
  const double phi0 = rnd::uniform(g, 0, 2 * std::numbers::pi);
  const double amp_scale = 1 + 0.1 * rnd::uniform(g, -1, 1);
  static constexpr std::array<double, kChannels> phase{0.0, 1.1, 2.3, 0.6, 1.7, 2.9};
  // Gravity appears on the vertical axis.
  static constexpr std::array<double, kChannels> offset{0.0, 0.0, 9.81, 0.0, 0.0, 0.0};

  int sp_start = n, sp_len = 0, st_len = 0;
  if (act != Activity::Straight) {
    sp_len = static_cast<int>(std::lround(lay.swing * (1 + kLengthJitter * rnd::uniform(g, -1, 1))));
    st_len = static_cast<int>(std::lround(lay.stance * (1 + kLengthJitter * rnd::uniform(g, -1, 1))));
    const int straight = n - sp_len - st_len;
    const int lead = std::max(kMinLeadIn + kCalibrationWindow,
                              static_cast<int>(std::lround(straight * rnd::uniform(g, 0.45, 0.65))));
    sp_start = std::min(lead, n - sp_len - st_len - kMinTail);
  }
  const int st_start = sp_start + sp_len;
  const double sep = p.separation;
  const double gain = turn_gain(act) * (1 + 0.1 * rnd::uniform(g, -1, 1));
  const double sign = p.turn_sign;
  constexpr int ramp = 6;

  for (int i = 0; i < n; ++i) {
    const double time = i / kSampleRateHz;
    const double phi = 2 * std::numbers::pi * cadence * time + phi0;
    const double e_sp = envelope(i - sp_start, sp_len, ramp);
    const double e_st = envelope(i - st_start, st_len, ramp);
    auto& s = t.samples[static_cast<std::size_t>(i)];
    // Planted foot damps the gait oscillation during the apex stance.
    const double gait = 1 - 0.6 * std::min(sep, 1.0) * e_st;
    for (std::size_t c = 0; c < kChannels; ++c) {
      const double a = p.amp[c] * amp_scale;
      s.channels[c] = offset[c] + gait * a * (std::sin(phi + phase[c]) + 0.35 * std::sin(2 * phi + 2 * phase[c]));
    }
    if (e_sp > 0) {
      // Swing into the turn: fast transverse rotation, forward burst, sagittal swing.
      s.channels[5] += sep * sign * gain * 1.6 * p.amp[5] * 3 * e_sp;
      s.channels[0] += sep * 0.8 * p.amp[0] * e_sp;
      s.channels[4] += sep * 0.6 * p.amp[4] * e_sp;
    }
    if (e_st > 0) {
      // Stance at the apex: counter-rotation plateau with a damped wobble, loaded vertical axis.
      const double tau = i - st_start;
      const double wobble = std::exp(-tau / 20.0) * std::sin(2 * std::numbers::pi * tau / 15.0);
      s.channels[5] += sep * sign * gain * p.amp[5] * (-2.0 * e_st + 1.5 * wobble);
      s.channels[2] += sep * 0.6 * p.amp[2] * e_st;
      s.channels[1] += sep * sign * 0.5 * p.amp[1] * e_st;
    }
    s.label = i >= sp_start && i < st_start ? Label::SP : (i >= st_start && i < st_start + st_len ? Label::ST : Label::SW);
    for (std::size_t c = 0; c < kChannels; ++c) {
      if (p.noise_sigma > 0) s.channels[c] += p.noise_sigma * p.amp[c] * rnd::normal(g);
    }
  }
  return t;
}

inline std::uint64_t subject_hash(const std::string& s) {
  rnd::Fnv1a h;
  for (unsigned char ch : s) h.add(ch);
  return h.value();
}

}  // namespace detail

// All trials of one subject: straight walking, every turn type at every
// stiffness (trials_per_cell each), and L-tests, in that order.
inline std::vector<Trial> synth_subject(const SubjectProfile& p, std::uint64_t seed) {
  validate(p);
  const auto lay = detail::layout(p);
  rnd::Engine g(rnd::mix(seed, detail::subject_hash(p.subject)));
  std::vector<Trial> out;
  for (int i = 0; i < p.straight_trials; ++i) {
    out.push_back(detail::synth_trial(p, lay, Activity::Straight, kStiffnesses[static_cast<std::size_t>(i) % 3], i, g));
  }
  for (Activity a : kTurnTypes) {
    for (Stiffness s : kStiffnesses) {
      for (int i = 0; i < p.trials_per_cell; ++i) out.push_back(detail::synth_trial(p, lay, a, s, i, g));
    }
  }
  for (int i = 0; i < p.ltest_trials; ++i) {
    out.push_back(detail::synth_trial(p, lay, Activity::LTest, kStiffnesses[static_cast<std::size_t>(i) % 3], i, g));
  }
  for (const auto& t : out) validate_trial(t);
  return out;
}

}  // namespace turnkan::data
