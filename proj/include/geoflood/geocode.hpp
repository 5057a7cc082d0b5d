#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "geoflood/geo.hpp"

namespace geoflood {

struct GeocodeResult {
  std::string display_name;
  BBox bbox;
  std::string provider_place_id;

  friend bool operator==(const GeocodeResult&, const GeocodeResult&) = default;
};

/// Parses a Nominatim `format=jsonv2` search response. `boundingbox` is
/// [south, north, west, east] as strings.
std::vector<GeocodeResult> parse_nominatim_results(const nlohmann::json& body);
nlohmann::json nominatim_results_to_json(const std::vector<GeocodeResult>& results);

/// Source of raw search results. Implementations may throw Error(Retryable)
/// or Error(CacheMiss).
class GeocodeBackend {
 public:
  virtual ~GeocodeBackend() = default;
  virtual std::vector<GeocodeResult> fetch(const std::string& query) = 0;
};

/// Replays recorded responses; never touches the network.
class FixtureBackend : public GeocodeBackend {
 public:
  /// `fixture` maps normalized names to Nominatim result lists.
  explicit FixtureBackend(const nlohmann::json& fixture);
  static FixtureBackend from_file(const std::string& path);

  std::vector<GeocodeResult> fetch(const std::string& query) override;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<GeocodeResult>> entries_;
};

/// Monotonic clock seam so request spacing can be tested without sleeping.
class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_until(time_point t) = 0;
};

class SystemClock final : public Clock {
 public:
  time_point now() override { return std::chrono::steady_clock::now(); }
  void sleep_until(time_point t) override;
};

/// Spaces successive acquire() calls at least `interval` apart.
class RateLimiter {
 public:
  RateLimiter(Clock& clock, std::chrono::milliseconds interval)
      : clock_(clock), interval_(interval) {}

  void acquire();

 private:
  Clock& clock_;
  std::chrono::milliseconds interval_;
  std::optional<Clock::time_point> last_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// (origin, path-with-query) -> response. Throws Error(Retryable) on transport failure.
using HttpGet = std::function<HttpResponse(const std::string& origin, const std::string& target)>;

HttpGet httplib_transport(std::string user_agent, std::chrono::seconds timeout);

/// Live Nominatim-compatible client: GET {base}/search?q=...&format=jsonv2,
/// one request at a time, spaced by the provider's 1 s policy.
class HttpBackend : public GeocodeBackend {
 public:
  static constexpr std::chrono::milliseconds kMinInterval{1000};

  HttpBackend(std::string base_url, Clock& clock, HttpGet transport);

  std::vector<GeocodeResult> fetch(const std::string& query) override;

  /// Builds the request target for `query` (exposed for tests).
  std::string request_target(const std::string& query) const;

 private:
  std::string origin_;
  std::string prefix_;
  HttpGet transport_;
  RateLimiter limiter_;
  std::mutex mutex_;
};

std::string url_encode(std::string_view s);

/// Caching front end. Cache keys are normalized names; the outbound query
/// keeps the caller's spelling.
class Geocoder {
 public:
  explicit Geocoder(std::shared_ptr<GeocodeBackend> backend);

  /// Provider-ordered results; empty list is a valid answer. Throws
  /// Error(Request) for an empty name and propagates backend errors.
  std::vector<GeocodeResult> search(const std::string& name);

  std::size_t backend_requests() const noexcept { return backend_requests_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

  /// Cache contents in fixture format, for recording live sessions.
  nlohmann::json export_cache() const;

 private:
  std::shared_ptr<GeocodeBackend> backend_;
  mutable std::shared_mutex cache_mutex_;
  std::unordered_map<std::string, std::vector<GeocodeResult>> cache_;
  std::mutex backend_mutex_;
  std::atomic<std::size_t> backend_requests_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace geoflood
