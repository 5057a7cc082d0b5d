#include "geoflood/labels.hpp"

#include "geoflood/text.hpp"

namespace geoflood {

std::optional<ClassLabel> parse_label(std::string_view s) noexcept {
  const auto v = text::normalize_name(s);
  if (v == "0" || v == "non_relevant" || v == "nonrelevant" || v == "non relevant") {
    return ClassLabel::NonRelevant;
  }
  if (v == "1" || v == "positive" || v == "positive_indication" || v == "positiveindication") {
    return ClassLabel::PositiveIndication;
  }
  if (v == "2" || v == "negative" || v == "negative_indication" || v == "negativeindication") {
    return ClassLabel::NegativeIndication;
  }
  return std::nullopt;
}

}  // namespace geoflood
