#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "geoflood/annotate.hpp"
#include "geoflood/geo.hpp"
#include "geoflood/store.hpp"

namespace geoflood {

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  double threshold_km2 = kDefaultThresholdKm2;
  std::string cors_origin = "http://localhost:5173";
  std::size_t max_results = 200000;  // rows per response; longer lists are cut and flagged
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

using QueryParams = std::map<std::string, std::string>;

/// Read-only endpoints over an immutable store snapshot. handle() is const
/// and safe to call from many threads.
class Api {
 public:
  Api(Store store, RoI roi, ApiConfig config = {});

  ApiResponse handle(std::string_view path, const QueryParams& params) const;

  const Store& store() const noexcept { return store_; }
  const RoI& roi() const noexcept { return roi_; }
  const ApiConfig& config() const noexcept { return config_; }
  /// Empty when the store passed the integrity check.
  const std::optional<std::string>& integrity_error() const noexcept { return integrity_error_; }

 private:
  ApiResponse scatter(const QueryParams& p) const;
  ApiResponse correlation(const QueryParams& p) const;
  ApiResponse sunburst(const QueryParams& p) const;
  ApiResponse whatif(const QueryParams& p) const;
  ApiResponse density(const QueryParams& p) const;

  Store store_;
  RoI roi_;
  ApiConfig config_;
  std::optional<std::string> integrity_error_;
};

/// `{"error": {"code": ..., "message": ...}}`
std::string error_body(std::string_view code, std::string_view message);

/// HTTP front end for an Api. The Api must outlive the server.
class ApiServer {
 public:
  explicit ApiServer(const Api& api);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace geoflood
