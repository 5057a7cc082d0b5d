#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoflood/error.hpp"
#include "geoflood/geo.hpp"

namespace geoflood {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// The place attached to a tweet by the client (`place` field).
struct TweetPlace {
  std::string name;
  BBox bbox;
  std::string place_id;  // empty when the provider gave none

  friend bool operator==(const TweetPlace&, const TweetPlace&) = default;
};

/// First entry of the enterprise `user.derived.locations` list.
struct DerivedPlace {
  std::string name;
  GeoPoint centroid;

  friend bool operator==(const DerivedPlace&, const DerivedPlace&) = default;
};

struct TweetRecord {
  std::string id;
  std::string text;  // untruncated
  Timestamp created_at{};
  std::string source_label;
  std::optional<GeoPoint> coordinates;
  std::optional<TweetPlace> place;
  std::optional<std::string> user_location_freeform;
  std::optional<DerivedPlace> derived_place;

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

/// Parses one raw tweet object. Throws Error with code Parse (malformed
/// JSON), Schema (missing id or text) or Validation (bad id, out-of-range
/// coordinates).
TweetRecord parse_tweet(std::string_view raw_json_line);

/// Emits a Twitter-shaped object that parse_tweet maps back to `t`. Texts
/// longer than 140 code points are written in the truncated/extended form.
std::string serialize_tweet(const TweetRecord& t);

/// `<a href="...">Twitter for iPhone</a>` -> `Twitter for iPhone`.
std::string strip_source_anchor(std::string_view source);

/// "Wed Aug 23 14:21:45 +0000 2017"
Timestamp parse_twitter_time(std::string_view s);
std::string format_twitter_time(Timestamp t);

bool is_retweet(const TweetRecord& t) noexcept;

struct LineError {
  std::size_t line = 0;  // 1-based
  ErrorCode code = ErrorCode::Parse;
  std::string message;
};

struct IngestResult {
  std::vector<TweetRecord> records;
  std::vector<LineError> errors;
  std::size_t blank_lines = 0;
};

/// Reads NDJSON; blank lines are skipped and bad lines are collected in
/// `errors` rather than aborting.
IngestResult read_ndjson(std::istream& in);

}  // namespace geoflood
