#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "geoflood/density.hpp"
#include "geoflood/serve.hpp"
#include "geoflood/stats.hpp"
#include "synthetic_store.hpp"
#include "test_support.hpp"

using namespace geoflood;
using nlohmann::json;

namespace {

const Store& shared_store() {
  static const Store store = [] {
    static testing::TempDir dir("serve");
    testing::build_synthetic_store(dir.path(), 3000, 21);
    return load_store(dir.path());
  }();
  return store;
}

std::string error_code(const ApiResponse& r) { return json::parse(r.body)["error"]["code"]; }

}  // namespace

TEST_CASE("endpoints equal the in-process module calls") {
  const Api api(shared_store(), default_roi());
  const auto& set = shared_store().set;
  for (auto [name, kind] : {std::pair{"bbox", AnnotationKind::BBox}, {"pbbox", AnnotationKind::PBBox}}) {
    const auto pf = place_frequencies(set, kind);
    auto r = api.handle("/scatter", {{"kind", name}});
    CHECK(r.status == 200);
    CHECK(r.body == scatter_to_json(pf).dump());
    CHECK(r.headers.count("X-Result-Truncated") == 0);
    r = api.handle("/correlation", {{"kind", name}});
    CHECK(r.body == correlate_loglog(pf).to_json().dump());
    r = api.handle("/correlation", {{"kind", name}, {"log", "false"}});
    CHECK(r.body == correlate_loglog(pf, false).to_json().dump());
  }
  auto r = api.handle("/sunburst", {{"threshold", "120"}});
  CHECK(r.body ==
        cross_distribution_to_json(cross_distribution(set, shared_store().tweets, 120.0)).dump());
  r = api.handle("/whatif", {});
  CHECK(r.body == threshold_whatif(set, kDefaultThresholdKm2).to_json().dump());

  DensityOptions opt;
  opt.cell_deg = 0.1;
  r = api.handle("/density", {{"cell", "0.1"}});
  CHECK(r.body == density_to_geojson(density_grid(set, default_roi(), opt)).dump());

  const auto ids = keyword_filter(shared_store().tweets, {"flood", "water"});
  opt.tweet_filter = &ids;
  opt.subtypes = {Subtype::Geotag};
  r = api.handle("/density", {{"cell", "0.1"}, {"keywords", "flood, water"}, {"subtypes", "geotag"}});
  CHECK(r.body == density_to_geojson(density_grid(set, default_roi(), opt)).dump());

  r = api.handle("/health", {});
  CHECK(json::parse(r.body)["tweets"] == shared_store().tweets.size());
}

TEST_CASE("responses are byte-identical across calls and carry headers") {
  const Api api(shared_store(), default_roi());
  for (const char* path : {"/scatter", "/correlation"}) {
    const auto a = api.handle(path, {{"kind", "pbbox"}});
    const auto b = api.handle(path, {{"kind", "pbbox"}});
    CHECK(a.body == b.body);
    CHECK(a.headers.at("Content-Type") == "application/json; charset=utf-8");
    CHECK(a.headers.at("Access-Control-Allow-Origin") == "http://localhost:5173");
  }
  ApiConfig no_cors;
  no_cors.cors_origin.clear();
  const Api quiet(shared_store(), default_roi(), no_cors);
  CHECK(quiet.handle("/health", {}).headers.count("Access-Control-Allow-Origin") == 0);
}

TEST_CASE("bad requests are 400 with a machine-readable code") {
  const Api api(shared_store(), default_roi());
  const std::vector<std::pair<std::string, QueryParams>> bad{
      {"/scatter", {}},
      {"/scatter", {{"kind", "geotag"}}},
      {"/scatter", {{"kind", "bbox"}, {"extra", "1"}}},
      {"/correlation", {{"kind", "bbox"}, {"log", "maybe"}}},
      {"/whatif", {{"threshold", "abc"}}},
      {"/whatif", {{"threshold", "12x"}}},
      {"/whatif", {{"threshold", "-5"}}},
      {"/density", {{"cell", "0"}}},
      {"/density", {{"cell", "1e-9"}}},
      {"/density", {{"subtypes", "l_bbox"}}},
      {"/density", {{"subtypes", "nonsense"}}},
      {"/density", {{"keywords", " , "}}},
  };
  for (const auto& [path, params] : bad) {
    CAPTURE(path);
    const auto r = api.handle(path, params);
    CHECK(r.status == 400);
    const auto code = error_code(r);
    CHECK((code == "request_error" || code == "validation_error"));
    CHECK_FALSE(json::parse(r.body)["error"]["message"].get<std::string>().empty());
  }
  const auto nf = api.handle("/nope", {});
  CHECK(nf.status == 404);
  CHECK(error_code(nf) == "not_found");
}

TEST_CASE("results beyond the cap are truncated and flagged") {
  ApiConfig cfg;
  cfg.max_results = 3;
  const Api api(shared_store(), default_roi(), cfg);
  const auto r = api.handle("/scatter", {{"kind", "bbox"}});
  CHECK(r.headers.at("X-Result-Truncated") == "true");
  CHECK(json::parse(r.body).size() == 3);
}

TEST_CASE("integrity failures answer 500") {
  Store broken = shared_store();
  REQUIRE_FALSE(broken.set.places.empty());
  broken.set.places.erase(broken.set.places.begin());
  const Api api(std::move(broken), default_roi());
  CHECK(api.integrity_error().has_value());
  const auto r = api.handle("/health", {});
  CHECK(r.status == 500);
  CHECK(error_code(r) == "integrity_error");
}

TEST_CASE("HTTP round trip") {
  const Api api(shared_store(), default_roi());
  ApiServer server(api);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread t([&] { server.listen(); });

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/scatter?kind=bbox");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == api.handle("/scatter", {{"kind", "bbox"}}).body);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");

  res = client.Get("/whatif?threshold=100");
  REQUIRE(res);
  CHECK(res->body == api.handle("/whatif", {{"threshold", "100"}}).body);

  res = client.Get("/whatif?threshold=1&threshold=2");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = client.Get("/scatter?kind=nope");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(error_code(ApiResponse{400, res->body, {}}) == "request_error");

  res = client.Options("/scatter");
  REQUIRE(res);
  CHECK(res->status == 204);

  server.stop();
  t.join();
}
