#include "geoflood/serve.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "geoflood/density.hpp"
#include "geoflood/error.hpp"
#include "geoflood/stats.hpp"
#include "geoflood/text.hpp"

namespace geoflood {

using nlohmann::json;

namespace {

void require_only(const QueryParams& p, std::initializer_list<std::string_view> allowed) {
  for (const auto& [name, value] : p) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == name;
    if (!ok) throw Error(ErrorCode::Request, "unknown parameter '" + name + "'");
  }
}

double parse_number(const std::string& name, const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || p != end || std::isnan(v)) {
    throw Error(ErrorCode::Request, "parameter '" + name + "' is not a number: '" + s + "'");
  }
  return v;
}

double threshold_param(const QueryParams& p, double fallback) {
  auto it = p.find("threshold");
  return it == p.end() ? fallback : parse_number("threshold", it->second);
}

AnnotationKind place_kind_param(const QueryParams& p) {
  auto it = p.find("kind");
  if (it == p.end()) throw Error(ErrorCode::Request, "missing parameter 'kind'");
  auto k = parse_kind(it->second);
  if (!k || *k == AnnotationKind::Geotag) {
    throw Error(ErrorCode::Request, "kind must be bbox or pbbox, got '" + it->second + "'");
  }
  return *k;
}

std::vector<std::string> list_param(const std::string& name, const std::string& value) {
  std::vector<std::string> out;
  for (auto part : text::split(value, ',')) {
    const auto b = part.find_first_not_of(' ');
    if (b == std::string::npos) continue;
    part = part.substr(b, part.find_last_not_of(' ') - b + 1);
    out.push_back(std::move(part));
  }
  if (out.empty()) throw Error(ErrorCode::Request, "parameter '" + name + "' is empty");
  return out;
}

ApiResponse json_response(const json& body, bool truncated = false) {
  ApiResponse r;
  r.body = body.dump();
  if (truncated) r.headers["X-Result-Truncated"] = "true";
  return r;
}

}  // namespace

std::string error_body(std::string_view code, std::string_view message) {
  return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

Api::Api(Store store, RoI roi, ApiConfig config)
    : store_(std::move(store)), roi_(std::move(roi)), config_(std::move(config)) {
  try {
    check_integrity(store_.set);
  } catch (const Error& e) {
    integrity_error_ = e.what();
  }
}

ApiResponse Api::handle(std::string_view path, const QueryParams& params) const {
  ApiResponse r;
  try {
    if (integrity_error_) throw Error(ErrorCode::Integrity, *integrity_error_);
    if (path == "/scatter") {
      r = scatter(params);
    } else if (path == "/correlation") {
      r = correlation(params);
    } else if (path == "/sunburst") {
      r = sunburst(params);
    } else if (path == "/whatif") {
      r = whatif(params);
    } else if (path == "/density") {
      r = density(params);
    } else if (path == "/health") {
      require_only(params, {});
      r = json_response({{"status", "ok"},
                         {"tweets", store_.tweets.size()},
                         {"annotations", store_.set.annotations.size()},
                         {"places", store_.set.places.size()},
                         {"threshold_km2", config_.threshold_km2}});
    } else {
      r.status = 404;
      r.body = error_body("not_found", "no endpoint " + std::string(path));
    }
  } catch (const Error& e) {
    r = ApiResponse{};
    r.status = e.code() == ErrorCode::Integrity ? 500 : 400;
    r.body = error_body(code_name(e.code()), e.what());
  }
  r.headers["Content-Type"] = "application/json; charset=utf-8";
  if (!config_.cors_origin.empty()) r.headers["Access-Control-Allow-Origin"] = config_.cors_origin;
  return r;
}

ApiResponse Api::scatter(const QueryParams& p) const {
  require_only(p, {"kind"});
  auto pf = place_frequencies(store_.set, place_kind_param(p));
  const bool cut = pf.size() > config_.max_results;
  if (cut) pf.resize(config_.max_results);
  return json_response(scatter_to_json(pf), cut);
}

ApiResponse Api::correlation(const QueryParams& p) const {
  require_only(p, {"kind", "log"});
  bool log_transform = true;
  if (auto it = p.find("log"); it != p.end()) {
    if (it->second == "true" || it->second == "1") {
      log_transform = true;
    } else if (it->second == "false" || it->second == "0") {
      log_transform = false;
    } else {
      throw Error(ErrorCode::Request, "log must be true or false");
    }
  }
  const auto pf = place_frequencies(store_.set, place_kind_param(p));
  return json_response(correlate_loglog(pf, log_transform).to_json());
}

ApiResponse Api::sunburst(const QueryParams& p) const {
  require_only(p, {"threshold"});
  const double t = threshold_param(p, config_.threshold_km2);
  const auto cross = cross_distribution(store_.set, store_.tweets, t);
  return json_response(cross_distribution_to_json(cross));
}

ApiResponse Api::whatif(const QueryParams& p) const {
  require_only(p, {"threshold"});
  const double t = threshold_param(p, config_.threshold_km2);
  return json_response(threshold_whatif(store_.set, t).to_json());
}

ApiResponse Api::density(const QueryParams& p) const {
  require_only(p, {"cell", "keywords", "subtypes", "threshold"});
  DensityOptions opt;
  opt.threshold_km2 = threshold_param(p, config_.threshold_km2);
  if (auto it = p.find("cell"); it != p.end()) opt.cell_deg = parse_number("cell", it->second);
  if (auto it = p.find("subtypes"); it != p.end()) {
    opt.subtypes.clear();
    for (const auto& name : list_param("subtypes", it->second)) {
      auto st = parse_subtype(name);
      if (!st) throw Error(ErrorCode::Request, "unknown subtype '" + name + "'");
      opt.subtypes.insert(*st);
    }
  }
  std::unordered_set<std::string> ids;
  if (auto it = p.find("keywords"); it != p.end()) {
    ids = keyword_filter(store_.tweets, list_param("keywords", it->second));
    opt.tweet_filter = &ids;
  }
  if (opt.cell_deg > 0.0 && std::isfinite(opt.cell_deg)) {
    const auto env = roi_.envelope();
    const double cells = (std::floor((env.east() - env.west()) / opt.cell_deg) + 1) *
                         (std::floor((env.north() - env.south()) / opt.cell_deg) + 1);
    if (cells > 1e8) throw Error(ErrorCode::Request, "cell size too small for the RoI envelope");
  }
  auto grid = density_grid(store_.set, roi_, opt);
  auto body = density_to_geojson(grid);
  auto& features = body["features"];
  const bool cut = features.size() > config_.max_results;
  if (cut) features.erase(features.begin() + static_cast<std::ptrdiff_t>(config_.max_results),
                          features.end());
  return json_response(body, cut);
}

struct ApiServer::Impl {
  const Api& api;
  httplib::Server server;
  explicit Impl(const Api& a) : api(a) {}
};

ApiServer::ApiServer(const Api& api) : impl_(std::make_unique<Impl>(api)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams params;
    for (const auto& [k, v] : req.params) {
      if (!params.emplace(k, v).second) {
        res.status = 400;
        res.set_content(error_body("request_error", "duplicate parameter '" + k + "'"),
                        "application/json; charset=utf-8");
        return;
      }
    }
    auto out = impl_->api.handle(req.path, params);
    res.status = out.status;
    std::string content_type = "application/json; charset=utf-8";
    for (const auto& [k, v] : out.headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        res.set_header(k, v);
      }
    }
    res.set_content(out.body, content_type);
  };
  impl_->server.Get(R"(/.*)", handler);
  impl_->server.Options(R"(/.*)", [this](const httplib::Request&, httplib::Response& res) {
    const auto& origin = impl_->api.config().cors_origin;
    if (!origin.empty()) res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.status = 204;
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace geoflood
