#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace geoflood {

/// Flood-relevance classes used for hand labeling.
enum class ClassLabel : std::uint8_t {
  NonRelevant = 0,         // not related to the flood
  PositiveIndication = 1,  // author directly affected
  NegativeIndication = 2,  // author reports being safe
};

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<ClassLabel, kNumClasses> kAllClasses = {
    ClassLabel::NonRelevant, ClassLabel::PositiveIndication, ClassLabel::NegativeIndication};

constexpr std::size_t class_index(ClassLabel c) noexcept { return static_cast<std::size_t>(c); }

constexpr std::string_view label_name(ClassLabel c) noexcept {
  switch (c) {
    case ClassLabel::NonRelevant: return "non_relevant";
    case ClassLabel::PositiveIndication: return "positive";
    case ClassLabel::NegativeIndication: return "negative";
  }
  return "non_relevant";
}

/// Accepts the names above, "0"/"1"/"2", and a few spelled-out aliases.
std::optional<ClassLabel> parse_label(std::string_view s) noexcept;

}  // namespace geoflood
