#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "turnkan/errors.hpp"
#include "turnkan/labels.hpp"

namespace turnkan::data {

inline constexpr std::size_t kChannels = 6;
inline constexpr double kSampleRateHz = 120.0;

enum class Activity { Straight, Spin90, Step90, Pivot180, LTest };
enum class Stiffness { Compliant, Intermediate, Stiff };

inline constexpr std::array<Activity, 3> kTurnTypes{Activity::Spin90, Activity::Step90, Activity::Pivot180};
inline constexpr std::array<Stiffness, 3> kStiffnesses{Stiffness::Compliant, Stiffness::Intermediate, Stiffness::Stiff};

inline std::string_view to_string(Activity a) {
  switch (a) {
    case Activity::Straight: return "straight";
    case Activity::Spin90: return "spin90";
    case Activity::Step90: return "step90";
    case Activity::Pivot180: return "pivot180";
    case Activity::LTest: return "ltest";
  }
  return "?";
}

inline Activity parse_activity(std::string_view s) {
  for (Activity a : {Activity::Straight, Activity::Spin90, Activity::Step90, Activity::Pivot180, Activity::LTest}) {
    if (s == to_string(a)) return a;
  }
  throw DataError("unknown activity '" + std::string(s) + "'");
}

inline std::string_view to_string(Stiffness s) {
  switch (s) {
    case Stiffness::Compliant: return "compliant";
    case Stiffness::Intermediate: return "intermediate";
    case Stiffness::Stiff: return "stiff";
  }
  return "?";
}

inline Stiffness parse_stiffness(std::string_view s) {
  for (Stiffness k : kStiffnesses) {
    if (s == to_string(k)) return k;
  }
  throw DataError("unknown stiffness '" + std::string(s) + "'");
}

inline bool is_turn(Activity a) { return a == Activity::Spin90 || a == Activity::Step90 || a == Activity::Pivot180; }

// One 120 Hz tick: accel x,y,z (m/s^2) then gyro x,y,z (rad/s).
struct LabeledSample {
  std::array<double, kChannels> channels{};
  Label label = Label::SW;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct Trial {
  std::string subject;
  Activity activity = Activity::Straight;
  Stiffness stiffness = Stiffness::Compliant;
  int index = 0;  // repetition number within (subject, activity, stiffness)
  std::vector<LabeledSample> samples;

  std::string id() const {
    return subject + "/" + std::string(to_string(activity)) + "/" + std::string(to_string(stiffness)) + "/" +
           std::to_string(index);
  }

  friend bool operator==(const Trial&, const Trial&) = default;
};

// Checks the label grammar: straight trials are all SW; other trials read
// SW+ (SP+ ST+ SW+)+ so every SP run is immediately followed by an ST run.
// Returns an empty string when valid, otherwise a description of the violation.
inline std::string label_grammar_violation(const Trial& t) {
  if (t.samples.empty()) return "empty trial";
  if (t.activity == Activity::Straight) {
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      if (t.samples[i].label != Label::SW) return "non-SW label in straight trial at sample " + std::to_string(i);
    }
    return {};
  }
  // States: 0 = SW, 1 = SP, 2 = ST
  int state = 0;
  int turns = 0;
  if (t.samples.front().label != Label::SW) return "trial must start with SW";
  for (std::size_t i = 1; i < t.samples.size(); ++i) {
    const Label l = t.samples[i].label;
    const int next = static_cast<int>(l == Label::SW ? 0 : l == Label::SP ? 1 : 2);
    if (next == state) continue;
    const bool ok = (state == 0 && next == 1) || (state == 1 && next == 2) || (state == 2 && next == 0);
    if (!ok) {
      return "illegal transition " + std::string(to_string(t.samples[i - 1].label)) + "->" + std::string(to_string(l)) +
             " at sample " + std::to_string(i);
    }
    if (next == 2) ++turns;
    state = next;
  }
  if (state != 0) return "trial must end with SW";
  if (turns == 0) return "turning trial without an SP->ST segment";
  return {};
}

inline void validate_trial(const Trial& t) {
  const auto why = label_grammar_violation(t);
  if (!why.empty()) throw DataError("trial " + t.id() + ": " + why);
}

}  // namespace turnkan::data
