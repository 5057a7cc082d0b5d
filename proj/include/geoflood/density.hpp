#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geoflood/annotate.hpp"
#include "geoflood/geo.hpp"
#include "geoflood/tweet.hpp"

namespace geoflood {

/// Ids of tweets whose full text contains any keyword (case-insensitive substring).
/// Throws Error(Request) if `keywords` is empty.
std::unordered_set<std::string> keyword_filter(const std::vector<TweetRecord>& tweets,
                                               const std::vector<std::string>& keywords);

inline constexpr double kDefaultCellDeg = 0.01;

/// Counts on a regular lon/lat grid anchored at the RoI envelope's
/// south-west corner. Cells are [x, x + cell) on both axes; the grid has
/// floor(extent / cell) + 1 columns/rows so the closed envelope is covered.
struct DensityGrid {
  GeoPoint origin;
  double cell_deg = kDefaultCellDeg;
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;  // (col, row) -> count
  std::size_t dropped = 0;  // representative point outside the envelope

  std::size_t total() const noexcept;
};

struct DensityOptions {
  double cell_deg = kDefaultCellDeg;
  std::set<Subtype> subtypes = {Subtype::Geotag, Subtype::SmallBBox};
  double threshold_km2 = kDefaultThresholdKm2;
  /// When set, only annotations of these tweets are aggregated.
  const std::unordered_set<std::string>* tweet_filter = nullptr;
};

/// Representative point: geotag -> its point; s_bbox -> box centroid.
/// Throws Error(Request) for cell_deg <= 0 or subtypes outside {geotag, s_bbox}.
DensityGrid density_grid(const AnnotationSet& set, const RoI& roi, const DensityOptions& options);

/// Cell index of a point, or nothing when outside the grid envelope.
std::optional<std::pair<std::size_t, std::size_t>> grid_cell(const DensityGrid& grid,
                                                             const BBox& envelope,
                                                             const GeoPoint& p);

/// FeatureCollection, one Polygon per non-empty cell with col/row/count properties.
nlohmann::json density_to_geojson(const DensityGrid& grid);
/// `col,row,lon,lat,count` where lon/lat is the cell's south-west corner.
std::string density_to_csv(const DensityGrid& grid);

}  // namespace geoflood
