#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "geoflood/geocode.hpp"
#include "test_support.hpp"

using namespace geoflood;
using namespace std::chrono_literals;
using testing::error_code_of;

namespace {

class FakeClock final : public Clock {
 public:
  time_point now() override { return t_; }
  void sleep_until(time_point t) override {
    if (t > t_) {
      slept_ += t - t_;
      t_ = t;
    }
  }
  void advance(std::chrono::milliseconds d) { t_ += d; }
  std::chrono::steady_clock::duration slept() const { return slept_; }

 private:
  time_point t_{};
  std::chrono::steady_clock::duration slept_{};
};

const char* kHoustonBody =
    R"([{"place_id": 7, "display_name": "Houston", "boundingbox": ["29.52", "30.11", "-95.79", "-95.01"]}])";

}  // namespace

TEST_CASE("jsonv2 results parse in provider order") {
  const auto r = parse_nominatim_results(nlohmann::json::parse(
      R"([{"place_id": 5, "display_name": "A", "boundingbox": ["29", "30", "-96", "-95"]},
          {"place_id": "x9", "display_name": "B", "boundingbox": [1, 2, 3, 4]}])"));
  REQUIRE(r.size() == 2);
  CHECK(r[0].bbox == BBox(-96, 29, -95, 30));
  CHECK(r[0].provider_place_id == "5");
  CHECK(r[1].bbox == BBox(3, 1, 4, 2));
  CHECK(r[1].provider_place_id == "x9");
  CHECK(parse_nominatim_results(nominatim_results_to_json(r)) == r);
  CHECK(error_code_of([] { parse_nominatim_results(nlohmann::json::object()); }) == ErrorCode::Parse);
}

TEST_CASE("fixture replay") {
  FixtureBackend fx = FixtureBackend::from_file((testing::data_dir() / "gazetteer_fixture.json").string());
  CHECK(fx.fetch("  KINGWOOD ").size() == 2);
  CHECK(fx.fetch("nowhere special").empty());
  CHECK(error_code_of([&] { fx.fetch("Atlantis"); }) == ErrorCode::CacheMiss);
}

TEST_CASE("rate limiter spaces calls by the interval") {
  FakeClock clock;
  RateLimiter limiter(clock, 1000ms);
  limiter.acquire();
  CHECK(clock.slept() == 0ms);
  clock.advance(300ms);
  limiter.acquire();
  CHECK(clock.slept() == 700ms);
  clock.advance(2500ms);
  limiter.acquire();
  CHECK(clock.slept() == 700ms);
}

TEST_CASE("HTTP backend builds the query and enforces one request per second") {
  FakeClock clock;
  std::vector<std::pair<std::string, std::string>> calls;
  std::vector<Clock::time_point> at;
  HttpBackend backend("https://geo.example.org/nominatim/", clock,
                      [&](const std::string& origin, const std::string& target) {
                        calls.emplace_back(origin, target);
                        at.push_back(clock.now());
                        return HttpResponse{200, kHoustonBody};
                      });
  for (int i = 0; i < 3; ++i) CHECK(backend.fetch("Houston, TX").size() == 1);
  REQUIRE(calls.size() == 3);
  CHECK(calls[0].first == "https://geo.example.org");
  CHECK(calls[0].second == "/nominatim/search?q=Houston%2C%20TX&format=jsonv2");
  CHECK(at[1] - at[0] >= 1000ms);
  CHECK(at[2] - at[1] >= 1000ms);
}

TEST_CASE("HTTP failures are retryable errors") {
  FakeClock clock;
  int status = 503;
  std::string body = "[]";
  HttpBackend backend("http://localhost:1", clock,
                      [&](const std::string&, const std::string&) { return HttpResponse{status, body}; });
  CHECK(error_code_of([&] { backend.fetch("x"); }) == ErrorCode::Retryable);
  status = 200;
  body = "<html>";
  CHECK(error_code_of([&] { backend.fetch("x"); }) == ErrorCode::Retryable);
  CHECK(error_code_of([&] { HttpBackend("no scheme", clock, nullptr); }) == ErrorCode::Config);
}

TEST_CASE("url encoding") {
  CHECK(url_encode("Lake Houston") == "Lake%20Houston");
  CHECK(url_encode("a-b_c.d~") == "a-b_c.d~");
  CHECK(url_encode("Bogotá") == "Bogot%C3%A1");
}

namespace {

class CountingBackend : public GeocodeBackend {
 public:
  std::vector<GeocodeResult> fetch(const std::string& query) override {
    ++calls;
    if (query == "boom") throw Error(ErrorCode::Retryable, "down");
    return {GeocodeResult{query, BBox(0, 0, 1, 1), "1"}};
  }
  int calls = 0;
};

}  // namespace

TEST_CASE("geocoder caches by normalized name") {
  auto backend = std::make_shared<CountingBackend>();
  Geocoder g(backend);
  CHECK(g.search("Lake Houston").size() == 1);
  CHECK(g.search("  lake   HOUSTON ").size() == 1);
  CHECK(backend->calls == 1);
  CHECK(g.backend_requests() == 1);
  CHECK(g.cache_hits() == 1);
  CHECK(error_code_of([&] { g.search("   "); }) == ErrorCode::Request);
  CHECK(error_code_of([&] { g.search("boom"); }) == ErrorCode::Retryable);
  CHECK(error_code_of([&] { g.search("boom"); }) == ErrorCode::Retryable);  // failures are not cached
  CHECK(backend->calls == 3);

  FixtureBackend replay(g.export_cache());
  CHECK(replay.fetch("lake houston") == g.search("Lake Houston"));
}

TEST_CASE("geocoder is safe under concurrent lookups") {
  auto backend = std::make_shared<CountingBackend>();
  Geocoder g(backend);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) g.search("place " + std::to_string(i % 10));
    });
  }
  for (auto& t : threads) t.join();
  CHECK(backend->calls == 10);
  CHECK(g.cache_hits() == 8 * 50 - 10);
}

TEST_CASE("httplib transport against a local endpoint") {
  httplib::Server server;
  std::string seen_agent, seen_query;
  server.Get("/search", [&](const httplib::Request& req, httplib::Response& res) {
    seen_agent = req.get_header_value("User-Agent");
    seen_query = req.get_param_value("q");
    res.set_content(kHoustonBody, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  SystemClock clock;
  HttpBackend backend("http://127.0.0.1:" + std::to_string(port), clock,
                      httplib_transport("geoflood-test", std::chrono::seconds(5)));
  const auto r = backend.fetch("Houston, TX");
  server.stop();
  th.join();
  REQUIRE(r.size() == 1);
  CHECK(r[0].bbox == BBox(-95.79, 29.52, -95.01, 30.11));
  CHECK(seen_agent == "geoflood-test");
  CHECK(seen_query == "Houston, TX");
}
