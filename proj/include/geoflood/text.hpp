#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace geoflood::text {

/// Decodes UTF-8; invalid bytes become U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Simple case folding: ASCII, Latin-1 Supplement, Greek and Cyrillic basic
/// ranges. Enough for keyword matching and n-gram hashing; not full Unicode.
char32_t fold_case(char32_t c) noexcept;
std::u32string fold_case(std::u32string_view s);
std::string fold_case_utf8(std::string_view s);

/// Number of code points.
std::size_t utf8_length(std::string_view s);
/// First `n` code points of `s`.
std::string utf8_prefix(std::string_view s, std::size_t n);

/// Case-insensitive substring test (both sides folded).
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Lowercase + collapse runs of whitespace into one space + trim.
std::string normalize_name(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace geoflood::text
