#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace geoflood {

/// Mean Earth radius (IUGG), km.
inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Validated point; throws Error(Validation) when out of range.
GeoPoint make_point(double lon, double lat);
bool is_valid_point(double lon, double lat) noexcept;

/// Axis-aligned lon/lat rectangle. No antimeridian wrap: west <= east.
class BBox {
 public:
  BBox() = default;
  /// Throws Error(Validation) on inverted or out-of-range edges.
  BBox(double west, double south, double east, double north);

  double west() const noexcept { return west_; }
  double south() const noexcept { return south_; }
  double east() const noexcept { return east_; }
  double north() const noexcept { return north_; }

  friend bool operator==(const BBox&, const BBox&) = default;

 private:
  double west_ = 0.0;
  double south_ = 0.0;
  double east_ = 0.0;
  double north_ = 0.0;
};

bool is_valid_bbox(double west, double south, double east, double north) noexcept;

/// Spherical-Earth area of the box in km^2: R^2 * dlon * (sin(north) - sin(south)).
double bbox_surface_km2(const BBox& b) noexcept;

/// Boundary inclusive.
bool bbox_contains_point(const BBox& b, const GeoPoint& p) noexcept;
/// Closed-rectangle intersection: shared edges and corners count.
bool bbox_intersects(const BBox& a, const BBox& b) noexcept;
GeoPoint bbox_centroid(const BBox& b) noexcept;

/// Region of interest: a non-empty union of rectangles.
class RoI {
 public:
  explicit RoI(std::vector<BBox> rects);

  std::span<const BBox> rects() const noexcept { return rects_; }
  /// Smallest box enclosing every rectangle.
  BBox envelope() const noexcept;

 private:
  std::vector<BBox> rects_;
};

bool roi_overlaps_point(const RoI& roi, const GeoPoint& p) noexcept;
bool roi_overlaps_bbox(const RoI& roi, const BBox& b) noexcept;

/// Approximation of the Texas coastal collection region (Houston, Galveston
/// Bay, Beaumont, Corpus Christi and the Wharton/Brazos lowlands).
RoI default_roi();

/// Accepts either a GeoJSON geometry/Feature/FeatureCollection whose polygons
/// are rectangles, or a plain list of [west, south, east, north] arrays
/// (optionally wrapped as {"rects": [...]}).
RoI roi_from_json(const nlohmann::json& j);
RoI load_roi(const std::string& path);
nlohmann::json roi_to_json(const RoI& roi);

nlohmann::json bbox_to_json(const BBox& b);  // [west, south, east, north]
BBox bbox_from_json(const nlohmann::json& j);

}  // namespace geoflood
