#include <doctest.h>

#include <map>
#include <random>

#include "geoflood/density.hpp"
#include "geoflood/synthetic.hpp"
#include "test_support.hpp"

using namespace geoflood;
using testing::error_code_of;

namespace {

const RoI kRoi({BBox(-96.0, 29.0, -95.0, 30.0)});

AnnotationSet geotags(const std::vector<GeoPoint>& pts) {
  AnnotationSet s;
  for (std::size_t i = 0; i < pts.size(); ++i) s.annotations.push_back(Annotation::geotag(std::to_string(i), pts[i]));
  return s;
}

}  // namespace

TEST_CASE("single geotag lands in one cell") {
  const auto g = density_grid(geotags({{-95.555, 29.123}}), kRoi, {});
  CHECK(g.ncols == 101);
  CHECK(g.nrows == 101);
  CHECK(g.origin == GeoPoint{-96.0, 29.0});
  REQUIRE(g.cells.size() == 1);
  CHECK(g.cells.begin()->second == 1);
  CHECK(g.cells.begin()->first == std::pair<std::size_t, std::size_t>{44, 12});
}

TEST_CASE("boundary points go to the larger index") {
  DensityOptions opt;
  opt.cell_deg = 0.25;
  const auto g = density_grid(geotags({{-95.75, 29.5}, {-95.0, 30.0}, {-96.0, 29.0}}), kRoi, opt);
  CHECK(g.cells.at({1, 2}) == 1);
  CHECK(g.cells.at({4, 4}) == 1);  // closed envelope corner gets its own cell
  CHECK(g.cells.at({0, 0}) == 1);
  CHECK(g.dropped == 0);
}

TEST_CASE("points outside the envelope are dropped and counted") {
  const auto g = density_grid(geotags({{-94.9, 29.5}, {-95.5, 29.5}}), kRoi, {});
  CHECK(g.total() == 1);
  CHECK(g.dropped == 1);
}

TEST_CASE("small boxes use their centroid; large boxes and pbbox are ignored") {
  AnnotationSet s;
  s.places["small"] = PlaceDoc{"small", "a", BBox(-95.52, 29.51, -95.51, 29.52), PlaceOrigin::TweetPlace};
  s.places["large"] = PlaceDoc{"large", "b", BBox(-96.0, 29.0, -95.0, 30.0), PlaceOrigin::TweetPlace};
  s.annotations = {Annotation::place("1", AnnotationKind::BBox, "small"),
                   Annotation::place("2", AnnotationKind::BBox, "large"),
                   Annotation::place("3", AnnotationKind::PBBox, "small")};
  const auto g = density_grid(s, kRoi, {});
  CHECK(g.total() == 1);
  CHECK(g.cells.begin()->first == std::pair<std::size_t, std::size_t>{48, 51});

  DensityOptions only_geotag;
  only_geotag.subtypes = {Subtype::Geotag};
  CHECK(density_grid(s, kRoi, only_geotag).total() == 0);
}

TEST_CASE("bad options are request errors") {
  DensityOptions o;
  o.cell_deg = 0.0;
  CHECK(error_code_of([&] { density_grid({}, kRoi, o); }) == ErrorCode::Request);
  DensityOptions p;
  p.subtypes = {Subtype::LargeBBox};
  CHECK(error_code_of([&] { density_grid({}, kRoi, p); }) == ErrorCode::Request);
}

TEST_CASE("random annotations: recount, conservation and 2x2 refinement") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lon(-96.1, -94.9), lat(28.9, 30.1);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back({lon(rng), lat(rng)});
  // Exact grid lines too.
  for (int i = 0; i < 50; ++i) pts.push_back({-96.0 + 0.02 * i, 29.0 + 0.02 * (i % 7)});
  const auto set = geotags(pts);

  DensityOptions coarse_opt;
  coarse_opt.cell_deg = 0.02;
  DensityOptions fine_opt;
  fine_opt.cell_deg = 0.01;
  const auto coarse = density_grid(set, kRoi, coarse_opt);
  const auto fine = density_grid(set, kRoi, fine_opt);

  CHECK(coarse.total() + coarse.dropped == pts.size());
  CHECK(fine.total() + fine.dropped == pts.size());

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> recount;
  std::size_t dropped = 0;
  for (const auto& p : pts) {
    if (p.lon < -96.0 || p.lon > -95.0 || p.lat < 29.0 || p.lat > 30.0) {
      ++dropped;
      continue;
    }
    const auto col = static_cast<std::size_t>(std::floor((p.lon + 96.0) / 0.02));
    const auto row = static_cast<std::size_t>(std::floor((p.lat - 29.0) / 0.02));
    ++recount[{col, row}];
  }
  CHECK(coarse.cells == recount);
  CHECK(coarse.dropped == dropped);

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> merged;
  for (const auto& [cell, n] : fine.cells) merged[{cell.first / 2, cell.second / 2}] += n;
  CHECK(merged == coarse.cells);
}

TEST_CASE("keyword filter semantics") {
  std::vector<TweetRecord> tweets(4);
  tweets[0].id = "1";
  tweets[0].text = "Harvey is coming";
  tweets[1].id = "2";
  tweets[1].text = "flooding everywhere";
  tweets[2].id = "3";
  tweets[2].text = "sunny day";
  tweets[3].id = "4";
  tweets[3].text = "ÉCOLE FERMÉE flood";
  const auto ids = keyword_filter(tweets, {"flood", "harvey"});
  CHECK(ids == std::unordered_set<std::string>{"1", "2", "4"});
  CHECK(keyword_filter(tweets, {"école"}) == std::unordered_set<std::string>{"4"});
  CHECK(error_code_of([&] { keyword_filter(tweets, {}); }) == ErrorCode::Request);
}

TEST_CASE("keyword filter recovers generator-planted keywords exactly") {
  SyntheticGenerator gen(MixConfig{}, 23);
  std::vector<TweetRecord> tweets;
  std::unordered_set<std::string> planted;
  for (int i = 0; i < 5000; ++i) {
    auto t = gen.next();
    if (t.has_keyword) planted.insert(t.record.id);
    tweets.push_back(std::move(t.record));
  }
  const auto found = keyword_filter(tweets, {"flood", "harvey"});
  REQUIRE_FALSE(planted.empty());
  CHECK(found == planted);
}

TEST_CASE("exports") {
  DensityOptions opt;
  opt.cell_deg = 0.5;
  const auto g = density_grid(geotags({{-95.9, 29.1}, {-95.9, 29.2}, {-95.1, 29.9}}), kRoi, opt);
  const auto gj = density_to_geojson(g);
  CHECK(gj["type"] == "FeatureCollection");
  REQUIRE(gj["features"].size() == 2);
  CHECK(gj["features"][0]["properties"]["count"] == 2);
  CHECK(gj["features"][0]["geometry"]["coordinates"][0][2] == nlohmann::json::array({-95.5, 29.5}));
  CHECK(gj["properties"]["total"] == 3);
  CHECK(density_to_csv(g) == "col,row,lon,lat,count\n0,0,-96.0,29.0,2\n1,1,-95.5,29.5,1\n");
}
