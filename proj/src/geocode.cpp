#include "geoflood/geocode.hpp"

#include <charconv>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "geoflood/error.hpp"
#include "geoflood/text.hpp"

namespace geoflood {

namespace {

using nlohmann::json;

double coord(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    double out = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc{} && p == s.data() + s.size()) return out;
  }
  throw Error(ErrorCode::Parse, "bad boundingbox coordinate " + v.dump());
}

std::string num_str(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

std::vector<GeocodeResult> parse_nominatim_results(const json& body) {
  if (!body.is_array()) throw Error(ErrorCode::Parse, "geocoder response is not a JSON array");
  std::vector<GeocodeResult> out;
  out.reserve(body.size());
  for (const auto& item : body) {
    const auto& bb = item.at("boundingbox");
    if (!bb.is_array() || bb.size() != 4) {
      throw Error(ErrorCode::Parse, "boundingbox must be [south, north, west, east]");
    }
    GeocodeResult r;
    r.bbox = BBox(coord(bb[2]), coord(bb[0]), coord(bb[3]), coord(bb[1]));
    r.display_name = item.value("display_name", std::string{});
    const auto& id = item.at("place_id");
    r.provider_place_id = id.is_string() ? id.get<std::string>() : id.dump();
    out.push_back(std::move(r));
  }
  return out;
}

json nominatim_results_to_json(const std::vector<GeocodeResult>& results) {
  json out = json::array();
  for (const auto& r : results) {
    json id;
    std::uint64_t numeric = 0;
    const auto& s = r.provider_place_id;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), numeric);
    if (ec == std::errc{} && p == s.data() + s.size() && !s.empty()) {
      id = numeric;
    } else {
      id = s;
    }
    out.push_back({{"place_id", id},
                   {"display_name", r.display_name},
                   {"boundingbox",
                    {num_str(r.bbox.south()), num_str(r.bbox.north()), num_str(r.bbox.west()),
                     num_str(r.bbox.east())}}});
  }
  return out;
}

FixtureBackend::FixtureBackend(const json& fixture) {
  if (!fixture.is_object()) throw Error(ErrorCode::Format, "geocoder fixture must be a JSON object");
  for (const auto& [name, results] : fixture.items()) {
    entries_[text::normalize_name(name)] = parse_nominatim_results(results);
  }
}

FixtureBackend FixtureBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open geocoder fixture " + path);
  try {
    return FixtureBackend(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, "geocoder fixture " + path + ": " + e.what());
  }
}

std::vector<GeocodeResult> FixtureBackend::fetch(const std::string& query) {
  auto it = entries_.find(text::normalize_name(query));
  if (it == entries_.end()) {
    throw Error(ErrorCode::CacheMiss, "no fixture entry for '" + query + "'");
  }
  return it->second;
}

void SystemClock::sleep_until(time_point t) { std::this_thread::sleep_until(t); }

void RateLimiter::acquire() {
  if (last_) {
    const auto earliest = *last_ + interval_;
    if (clock_.now() < earliest) clock_.sleep_until(earliest);
  }
  last_ = clock_.now();
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
        c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

HttpGet httplib_transport(std::string user_agent, std::chrono::seconds timeout) {
  return [user_agent = std::move(user_agent), timeout](const std::string& origin,
                                                      const std::string& target) {
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_follow_location(true);
    auto res = client.Get(target, httplib::Headers{{"User-Agent", user_agent}});
    if (!res) {
      throw Error(ErrorCode::Retryable,
                  "geocoder request failed: " + httplib::to_string(res.error()));
    }
    return HttpResponse{res->status, res->body};
  };
}

HttpBackend::HttpBackend(std::string base_url, Clock& clock, HttpGet transport)
    : transport_(std::move(transport)), limiter_(clock, kMinInterval) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos || base_url.empty()) {
    throw Error(ErrorCode::Config, "geocoder base URL must look like http(s)://host[:port][/path]");
  }
  const auto path_start = base_url.find('/', scheme + 3);
  origin_ = base_url.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? std::string{} : base_url.substr(path_start);
}

std::string HttpBackend::request_target(const std::string& query) const {
  return prefix_ + "/search?q=" + url_encode(query) + "&format=jsonv2";
}

std::vector<GeocodeResult> HttpBackend::fetch(const std::string& query) {
  std::lock_guard lock(mutex_);
  limiter_.acquire();
  const auto response = transport_(origin_, request_target(query));
  if (response.status != 200) {
    throw Error(ErrorCode::Retryable, "geocoder HTTP status " + std::to_string(response.status));
  }
  json body;
  try {
    body = json::parse(response.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Retryable, std::string("geocoder returned malformed JSON: ") + e.what());
  }
  return parse_nominatim_results(body);
}

Geocoder::Geocoder(std::shared_ptr<GeocodeBackend> backend) : backend_(std::move(backend)) {
  if (!backend_) throw Error(ErrorCode::Config, "geocoder needs a backend");
}

std::vector<GeocodeResult> Geocoder::search(const std::string& name) {
  const auto key = text::normalize_name(name);
  if (key.empty()) throw Error(ErrorCode::Request, "geocoder query must be non-empty");
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++cache_hits_;
      return it->second;
    }
  }
  std::lock_guard serial(backend_mutex_);
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++cache_hits_;
      return it->second;
    }
  }
  ++backend_requests_;
  auto results = backend_->fetch(name);
  std::unique_lock lock(cache_mutex_);
  cache_.emplace(key, results);
  return results;
}

json Geocoder::export_cache() const {
  std::shared_lock lock(cache_mutex_);
  json out = json::object();
  for (const auto& [key, results] : cache_) out[key] = nominatim_results_to_json(results);
  return out;
}

}  // namespace geoflood
