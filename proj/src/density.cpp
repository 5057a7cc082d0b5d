#include "geoflood/density.hpp"

#include <algorithm>
#include <cmath>

#include "geoflood/error.hpp"
#include "geoflood/text.hpp"

namespace geoflood {

std::unordered_set<std::string> keyword_filter(const std::vector<TweetRecord>& tweets,
                                               const std::vector<std::string>& keywords) {
  if (keywords.empty()) throw Error(ErrorCode::Request, "keyword list must not be empty");
  std::vector<std::u32string> needles;
  for (const auto& k : keywords) needles.push_back(text::fold_case(text::decode_utf8(k)));
  std::unordered_set<std::string> out;
  for (const auto& t : tweets) {
    const auto hay = text::fold_case(text::decode_utf8(t.text));
    for (const auto& n : needles) {
      if (hay.find(n) != std::u32string::npos) {
        out.insert(t.id);
        break;
      }
    }
  }
  return out;
}

std::size_t DensityGrid::total() const noexcept {
  std::size_t sum = 0;
  for (const auto& [cell, count] : cells) sum += count;
  return sum;
}

std::optional<std::pair<std::size_t, std::size_t>> grid_cell(const DensityGrid& grid,
                                                             const BBox& envelope,
                                                             const GeoPoint& p) {
  if (!bbox_contains_point(envelope, p)) return std::nullopt;
  const double fx = std::floor((p.lon - grid.origin.lon) / grid.cell_deg);
  const double fy = std::floor((p.lat - grid.origin.lat) / grid.cell_deg);
  const auto col = static_cast<std::size_t>(std::max(0.0, fx));
  const auto row = static_cast<std::size_t>(std::max(0.0, fy));
  if (col >= grid.ncols || row >= grid.nrows) return std::nullopt;
  return std::pair{col, row};
}

DensityGrid density_grid(const AnnotationSet& set, const RoI& roi, const DensityOptions& options) {
  if (!(options.cell_deg > 0.0) || !std::isfinite(options.cell_deg)) {
    throw Error(ErrorCode::Request, "cell size must be > 0");
  }
  for (auto st : options.subtypes) {
    if (st != Subtype::Geotag && st != Subtype::SmallBBox) {
      throw Error(ErrorCode::Request, "density subtypes must be geotag and/or s_bbox, got " +
                                          std::string(subtype_name(st)));
    }
  }
  const auto env = roi.envelope();
  DensityGrid grid;
  grid.origin = GeoPoint{env.west(), env.south()};
  grid.cell_deg = options.cell_deg;
  grid.ncols = static_cast<std::size_t>(std::floor((env.east() - env.west()) / options.cell_deg)) + 1;
  grid.nrows = static_cast<std::size_t>(std::floor((env.north() - env.south()) / options.cell_deg)) + 1;

  for (const auto& a : set.annotations) {
    if (options.tweet_filter && !options.tweet_filter->contains(a.tweet_id())) continue;
    if (a.kind() == AnnotationKind::PBBox) continue;
    const auto st = classify_specificity(a, set.places, options.threshold_km2);
    if (!options.subtypes.contains(st)) continue;
    const GeoPoint p = st == Subtype::Geotag ? a.point() : bbox_centroid(set.places.at(a.place_id()).bbox);
    if (auto cell = grid_cell(grid, env, p)) {
      ++grid.cells[*cell];
    } else {
      ++grid.dropped;
    }
  }
  return grid;
}

nlohmann::json density_to_geojson(const DensityGrid& grid) {
  auto features = nlohmann::json::array();
  // Row-major order (south to north, then west to east) for stable output.
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> ordered(grid.cells.begin(),
                                                                                   grid.cells.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return std::pair{a.first.second, a.first.first} < std::pair{b.first.second, b.first.first};
  });
  for (const auto& [cell, count] : ordered) {
    const double w = grid.origin.lon + static_cast<double>(cell.first) * grid.cell_deg;
    const double s = grid.origin.lat + static_cast<double>(cell.second) * grid.cell_deg;
    const double e = w + grid.cell_deg;
    const double n = s + grid.cell_deg;
    features.push_back(
        {{"type", "Feature"},
         {"geometry",
          {{"type", "Polygon"},
           {"coordinates",
            nlohmann::json::array({nlohmann::json::array(
                {nlohmann::json::array({w, s}), nlohmann::json::array({e, s}),
                 nlohmann::json::array({e, n}), nlohmann::json::array({w, n}),
                 nlohmann::json::array({w, s})})})}}},
         {"properties", {{"col", cell.first}, {"row", cell.second}, {"count", count}}}});
  }
  return {{"type", "FeatureCollection"},
          {"features", std::move(features)},
          {"properties",
           {{"origin", {grid.origin.lon, grid.origin.lat}},
            {"cell_deg", grid.cell_deg},
            {"ncols", grid.ncols},
            {"nrows", grid.nrows},
            {"total", grid.total()},
            {"dropped", grid.dropped}}}};
}

std::string density_to_csv(const DensityGrid& grid) {
  std::string out = "col,row,lon,lat,count\n";
  for (const auto& [cell, count] : grid.cells) {
    const double lon = grid.origin.lon + static_cast<double>(cell.first) * grid.cell_deg;
    const double lat = grid.origin.lat + static_cast<double>(cell.second) * grid.cell_deg;
    out += std::to_string(cell.first) + "," + std::to_string(cell.second) + "," +
           nlohmann::json(lon).dump() + "," + nlohmann::json(lat).dump() + "," +
           std::to_string(count) + "\n";
  }
  return out;
}

}  // namespace geoflood
