#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "turnkan/errors.hpp"

namespace turnkan {

// Gait classes in report order: straight walking, stance at turn apex, swing before turn.
enum class Label : int { SW = 0, ST = 1, SP = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<Label, kNumClasses> kLabels{Label::SW, Label::ST, Label::SP};

inline constexpr std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::SW: return "SW";
    case Label::ST: return "ST";
    case Label::SP: return "SP";
  }
  return "?";
}

inline Label parse_label(std::string_view token) {
  if (token == "SW") return Label::SW;
  if (token == "ST") return Label::ST;
  if (token == "SP") return Label::SP;
  throw DataError("unknown label token '" + std::string(token) + "'");
}

inline Label label_from_index(std::size_t i) {
  if (i >= kNumClasses) throw DataError("label index " + std::to_string(i) + " out of range");
  return static_cast<Label>(i);
}

}  // namespace turnkan
