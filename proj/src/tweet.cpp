#include "geoflood/tweet.hpp"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <istream>

#include <json.hpp>

#include "geoflood/text.hpp"

namespace geoflood {

namespace {

using nlohmann::json;

constexpr std::size_t kTruncateAt = 140;

bool all_digits(std::string_view s) {
  return !s.empty() && std::ranges::all_of(s, [](char c) { return c >= '0' && c <= '9'; });
}

const json* field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string read_id(const json& obj) {
  if (const auto* v = field(obj, "id_str"); v && v->is_string()) return v->get<std::string>();
  if (const auto* v = field(obj, "id")) {
    if (v->is_number_unsigned() || v->is_number_integer()) {
      if (v->is_number_integer() && v->get<std::int64_t>() < 0) {
        throw Error(ErrorCode::Validation, "tweet id must be non-negative");
      }
      return std::to_string(v->get<std::uint64_t>());
    }
    if (v->is_string()) return v->get<std::string>();
  }
  throw Error(ErrorCode::Schema, "missing id_str/id");
}

std::string read_text(const json& obj) {
  const auto* truncated = field(obj, "truncated");
  if (truncated && truncated->is_boolean() && truncated->get<bool>()) {
    const auto* ext = field(obj, "extended_tweet");
    const json* full = ext && ext->is_object() ? field(*ext, "full_text") : nullptr;
    if (!full || !full->is_string()) {
      throw Error(ErrorCode::Schema, "truncated tweet without extended_tweet.full_text");
    }
    return full->get<std::string>();
  }
  if (const auto* v = field(obj, "full_text"); v && v->is_string()) return v->get<std::string>();
  if (const auto* v = field(obj, "text"); v && v->is_string()) return v->get<std::string>();
  throw Error(ErrorCode::Schema, "missing text");
}

std::optional<std::int64_t> read_timestamp_ms(const json& obj) {
  const auto* v = field(obj, "timestamp_ms");
  if (!v) return std::nullopt;
  if (v->is_number_integer()) return v->get<std::int64_t>();
  if (v->is_string()) {
    const auto s = v->get<std::string>();
    std::int64_t ms = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), ms);
    if (ec == std::errc{} && p == s.data() + s.size()) return ms;
  }
  return std::nullopt;
}

Timestamp read_created_at(const json& obj) {
  const auto ms = read_timestamp_ms(obj);
  if (const auto* v = field(obj, "created_at")) {
    if (v->is_string()) {
      try {
        const auto t = parse_twitter_time(v->get<std::string>());
        // timestamp_ms refines the legacy field when both agree on the second.
        if (ms && (*ms - t.time_since_epoch().count()) >= 0 &&
            (*ms - t.time_since_epoch().count()) < 1000) {
          return Timestamp{std::chrono::milliseconds{*ms}};
        }
        return t;
      } catch (const Error&) {
        if (!ms) throw;
      }
    } else if (v->is_number_integer()) {
      return Timestamp{std::chrono::milliseconds{v->get<std::int64_t>()}};
    }
  }
  if (ms) return Timestamp{std::chrono::milliseconds{*ms}};
  throw Error(ErrorCode::Schema, "missing created_at/timestamp_ms");
}

std::optional<GeoPoint> read_point(const json& geo) {
  const auto* coords = field(geo, "coordinates");
  if (!coords || !coords->is_array() || coords->size() < 2 || !(*coords)[0].is_number() ||
      !(*coords)[1].is_number()) {
    throw Error(ErrorCode::Schema, "point coordinates must be [lon, lat]");
  }
  return make_point((*coords)[0].get<double>(), (*coords)[1].get<double>());
}

std::optional<TweetPlace> read_place(const json& obj) {
  const auto* place = field(obj, "place");
  if (!place || !place->is_object()) return std::nullopt;
  const auto* bb = field(*place, "bounding_box");
  if (!bb || !bb->is_object()) return std::nullopt;
  const auto* coords = field(*bb, "coordinates");
  if (!coords || !coords->is_array() || coords->empty() || !(*coords)[0].is_array() ||
      (*coords)[0].empty()) {
    throw Error(ErrorCode::Schema, "place.bounding_box without coordinates");
  }
  double w = 180.0, s = 90.0, e = -180.0, n = -90.0;
  for (const auto& pos : (*coords)[0]) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw Error(ErrorCode::Schema, "place.bounding_box position must be [lon, lat]");
    }
    const auto p = make_point(pos[0].get<double>(), pos[1].get<double>());
    w = std::min(w, p.lon);
    e = std::max(e, p.lon);
    s = std::min(s, p.lat);
    n = std::max(n, p.lat);
  }
  TweetPlace out;
  out.bbox = BBox(w, s, e, n);
  if (const auto* v = field(*place, "full_name"); v && v->is_string()) {
    out.name = v->get<std::string>();
  } else if (const auto* v2 = field(*place, "name"); v2 && v2->is_string()) {
    out.name = v2->get<std::string>();
  }
  if (const auto* v = field(*place, "id"); v && v->is_string()) out.place_id = v->get<std::string>();
  return out;
}

std::optional<DerivedPlace> read_derived(const json& user) {
  const auto* derived = field(user, "derived");
  if (!derived || !derived->is_object()) return std::nullopt;
  const auto* locations = field(*derived, "locations");
  if (!locations || !locations->is_array() || locations->empty()) return std::nullopt;
  const auto& first = (*locations)[0];
  const auto* geo = field(first, "geo");
  if (!geo || !geo->is_object()) return std::nullopt;
  DerivedPlace out;
  out.centroid = *read_point(*geo);
  if (const auto* v = field(first, "full_name"); v && v->is_string()) {
    out.name = v->get<std::string>();
  } else {
    std::string joined;
    for (const char* key : {"locality", "region", "country"}) {
      if (const auto* part = field(first, key); part && part->is_string()) {
        if (!joined.empty()) joined += ", ";
        joined += part->get<std::string>();
      }
    }
    out.name = std::move(joined);
  }
  if (out.name.empty()) return std::nullopt;
  return out;
}

}  // namespace

std::string strip_source_anchor(std::string_view source) {
  const auto close = source.rfind("</a>");
  if (close != std::string_view::npos) {
    const auto open_end = source.rfind('>', close == 0 ? 0 : close - 1);
    if (open_end != std::string_view::npos && open_end < close) {
      return std::string(source.substr(open_end + 1, close - open_end - 1));
    }
  }
  if (source.find_first_of("<>") == std::string_view::npos) return std::string(source);
  // Not an anchor but carries markup: drop anything tag-like.
  std::string out;
  bool in_tag = false;
  for (char c : source) {
    if (c == '<') {
      in_tag = true;
    } else if (c == '>') {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  return out;
}

Timestamp parse_twitter_time(std::string_view s) {
  std::tm tm{};
  const std::string buf(s);
  const char* end = strptime(buf.c_str(), "%a %b %d %H:%M:%S %z %Y", &tm);
  if (end == nullptr || *end != '\0') {
    throw Error(ErrorCode::Parse, "unrecognized timestamp '" + buf + "'");
  }
  const long offset = tm.tm_gmtoff;
  const std::time_t secs = timegm(&tm) - offset;
  return Timestamp{std::chrono::seconds{secs}};
}

std::string format_twitter_time(Timestamp t) {
  const auto secs = std::chrono::floor<std::chrono::seconds>(t);
  const std::time_t tt = secs.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  const auto n = std::strftime(buf, sizeof buf, "%a %b %d %H:%M:%S +0000 %Y", &tm);
  return std::string(buf, n);
}

bool is_retweet(const TweetRecord& t) noexcept { return t.text.starts_with("RT @"); }

TweetRecord parse_tweet(std::string_view raw_json_line) {
  json obj;
  try {
    obj = json::parse(raw_json_line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::Parse, "tweet line is not a JSON object");

  TweetRecord t;
  t.id = read_id(obj);
  if (!all_digits(t.id)) throw Error(ErrorCode::Validation, "tweet id is not numeric: " + t.id);
  t.text = read_text(obj);
  t.created_at = read_created_at(obj);
  if (const auto* v = field(obj, "source"); v && v->is_string()) {
    t.source_label = strip_source_anchor(v->get<std::string>());
  }
  if (const auto* v = field(obj, "coordinates"); v && v->is_object()) t.coordinates = read_point(*v);
  t.place = read_place(obj);
  if (const auto* user = field(obj, "user"); user && user->is_object()) {
    if (const auto* loc = field(*user, "location"); loc && loc->is_string()) {
      t.user_location_freeform = loc->get<std::string>();
    }
    t.derived_place = read_derived(*user);
  }
  return t;
}

std::string serialize_tweet(const TweetRecord& t) {
  json obj = json::object();
  obj["id_str"] = t.id;
  obj["created_at"] = format_twitter_time(t.created_at);
  obj["timestamp_ms"] = std::to_string(t.created_at.time_since_epoch().count());
  if (text::utf8_length(t.text) > kTruncateAt) {
    obj["text"] = text::utf8_prefix(t.text, kTruncateAt - 1) + "…";
    obj["truncated"] = true;
    obj["extended_tweet"] = {{"full_text", t.text}};
  } else {
    obj["text"] = t.text;
    obj["truncated"] = false;
  }
  obj["source"] = t.source_label.empty()
                      ? std::string{}
                      : "<a href=\"http://twitter.com\" rel=\"nofollow\">" + t.source_label + "</a>";
  if (t.coordinates) {
    obj["coordinates"] = {{"type", "Point"},
                          {"coordinates", {t.coordinates->lon, t.coordinates->lat}}};
  } else {
    obj["coordinates"] = nullptr;
  }
  if (t.place) {
    const auto& b = t.place->bbox;
    json place = {{"full_name", t.place->name},
                  {"bounding_box",
                   {{"type", "Polygon"},
                    {"coordinates", json::array({json::array({
                                        json::array({b.west(), b.south()}),
                                        json::array({b.east(), b.south()}),
                                        json::array({b.east(), b.north()}),
                                        json::array({b.west(), b.north()}),
                                    })})}}}};
    if (!t.place->place_id.empty()) place["id"] = t.place->place_id;
    obj["place"] = std::move(place);
  } else {
    obj["place"] = nullptr;
  }
  json user = json::object();
  user["location"] = t.user_location_freeform ? json(*t.user_location_freeform) : json(nullptr);
  if (t.derived_place) {
    user["derived"] = {
        {"locations",
         json::array({{{"full_name", t.derived_place->name},
                       {"geo",
                        {{"type", "point"},
                         {"coordinates",
                          {t.derived_place->centroid.lon, t.derived_place->centroid.lat}}}}}})}};
  }
  obj["user"] = std::move(user);
  return obj.dump();
}

IngestResult read_ndjson(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      ++result.blank_lines;
      continue;
    }
    try {
      result.records.push_back(parse_tweet(line));
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.code(), e.what()});
    }
  }
  return result;
}

}  // namespace geoflood
