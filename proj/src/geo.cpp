#include "geoflood/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "geoflood/error.hpp"

namespace geoflood {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string fmt_box(double w, double s, double e, double n) {
  return "[" + std::to_string(w) + ", " + std::to_string(s) + ", " + std::to_string(e) +
         ", " + std::to_string(n) + "]";
}

// A GeoJSON linear ring describing an axis-aligned rectangle.
BBox rect_from_ring(const nlohmann::json& ring) {
  if (!ring.is_array() || ring.size() < 4) {
    throw Error(ErrorCode::Format, "RoI polygon ring must have at least 4 positions");
  }
  double w = 180.0, s = 90.0, e = -180.0, n = -90.0;
  for (const auto& pos : ring) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw Error(ErrorCode::Format, "RoI polygon position must be [lon, lat]");
    }
    const double lon = pos[0].get<double>();
    const double lat = pos[1].get<double>();
    w = std::min(w, lon);
    e = std::max(e, lon);
    s = std::min(s, lat);
    n = std::max(n, lat);
  }
  unsigned corners = 0;
  for (const auto& pos : ring) {
    const double lon = pos[0].get<double>();
    const double lat = pos[1].get<double>();
    if ((lon != w && lon != e) || (lat != s && lat != n)) {
      throw Error(ErrorCode::Format, "RoI polygon is not an axis-aligned rectangle");
    }
    for (unsigned c = 0; c < 4; ++c) {
      if (lon == ((c & 1) ? e : w) && lat == ((c & 2) ? n : s)) corners |= 1u << c;
    }
  }
  if (corners != 0xF) {
    throw Error(ErrorCode::Format, "RoI polygon is not an axis-aligned rectangle");
  }
  return BBox(w, s, e, n);
}

void collect_geometry(const nlohmann::json& g, std::vector<BBox>& out) {
  const auto type = g.value("type", std::string{});
  if (type == "Polygon") {
    out.push_back(rect_from_ring(g.at("coordinates").at(0)));
  } else if (type == "MultiPolygon") {
    for (const auto& poly : g.at("coordinates")) out.push_back(rect_from_ring(poly.at(0)));
  } else if (type == "Feature") {
    collect_geometry(g.at("geometry"), out);
  } else if (type == "FeatureCollection") {
    for (const auto& f : g.at("features")) collect_geometry(f, out);
  } else if (type == "GeometryCollection") {
    for (const auto& sub : g.at("geometries")) collect_geometry(sub, out);
  } else {
    throw Error(ErrorCode::Format, "unsupported RoI GeoJSON type '" + type + "'");
  }
}

}  // namespace

bool is_valid_point(double lon, double lat) noexcept {
  return std::isfinite(lon) && std::isfinite(lat) && lon >= -180.0 && lon <= 180.0 &&
         lat >= -90.0 && lat <= 90.0;
}

GeoPoint make_point(double lon, double lat) {
  if (!is_valid_point(lon, lat)) {
    throw Error(ErrorCode::Validation, "coordinates out of range: lon=" + std::to_string(lon) +
                                           " lat=" + std::to_string(lat));
  }
  return GeoPoint{lon, lat};
}

bool is_valid_bbox(double west, double south, double east, double north) noexcept {
  return is_valid_point(west, south) && is_valid_point(east, north) && west <= east &&
         south <= north;
}

BBox::BBox(double west, double south, double east, double north)
    : west_(west), south_(south), east_(east), north_(north) {
  if (!is_valid_bbox(west, south, east, north)) {
    throw Error(ErrorCode::Validation, "invalid bounding box " + fmt_box(west, south, east, north));
  }
}

double bbox_surface_km2(const BBox& b) noexcept {
  const double dlon = (b.east() - b.west()) * kDegToRad;
  const double band = std::sin(b.north() * kDegToRad) - std::sin(b.south() * kDegToRad);
  return std::max(0.0, kEarthRadiusKm * kEarthRadiusKm * dlon * band);
}

bool bbox_contains_point(const BBox& b, const GeoPoint& p) noexcept {
  return p.lon >= b.west() && p.lon <= b.east() && p.lat >= b.south() && p.lat <= b.north();
}

bool bbox_intersects(const BBox& a, const BBox& b) noexcept {
  return a.west() <= b.east() && b.west() <= a.east() && a.south() <= b.north() &&
         b.south() <= a.north();
}

GeoPoint bbox_centroid(const BBox& b) noexcept {
  return GeoPoint{(b.west() + b.east()) / 2.0, (b.south() + b.north()) / 2.0};
}

RoI::RoI(std::vector<BBox> rects) : rects_(std::move(rects)) {
  if (rects_.empty()) throw Error(ErrorCode::Validation, "RoI needs at least one rectangle");
}

BBox RoI::envelope() const noexcept {
  double w = rects_.front().west(), s = rects_.front().south();
  double e = rects_.front().east(), n = rects_.front().north();
  for (const auto& r : rects_) {
    w = std::min(w, r.west());
    s = std::min(s, r.south());
    e = std::max(e, r.east());
    n = std::max(n, r.north());
  }
  return BBox(w, s, e, n);
}

bool roi_overlaps_point(const RoI& roi, const GeoPoint& p) noexcept {
  return std::ranges::any_of(roi.rects(), [&](const BBox& r) { return bbox_contains_point(r, p); });
}

bool roi_overlaps_bbox(const RoI& roi, const BBox& b) noexcept {
  return std::ranges::any_of(roi.rects(), [&](const BBox& r) { return bbox_intersects(r, b); });
}

RoI default_roi() {
  return RoI({
      BBox(-97.90, 27.40, -93.50, 30.40),  // coastal plain, Corpus Christi to Beaumont
      BBox(-96.60, 30.40, -93.50, 31.00),  // north of Houston (Conroe, Huntsville fringe)
      BBox(-93.50, 29.50, -93.20, 30.40),  // Sabine Pass / Orange
  });
}

nlohmann::json bbox_to_json(const BBox& b) {
  return nlohmann::json::array({b.west(), b.south(), b.east(), b.north()});
}

BBox bbox_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorCode::Format, "bbox must be [west, south, east, north]");
  }
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::Format, "bbox entries must be numbers");
  }
  return BBox(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

RoI roi_from_json(const nlohmann::json& j) {
  std::vector<BBox> rects;
  if (j.is_object() && j.contains("rects")) {
    for (const auto& r : j.at("rects")) rects.push_back(bbox_from_json(r));
  } else if (j.is_array()) {
    for (const auto& r : j) rects.push_back(bbox_from_json(r));
  } else if (j.is_object() && j.contains("type")) {
    collect_geometry(j, rects);
  } else {
    throw Error(ErrorCode::Format, "RoI must be a GeoJSON object or a list of rectangles");
  }
  return RoI(std::move(rects));
}

RoI load_roi(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open RoI file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, "RoI file " + path + ": " + e.what());
  }
  return roi_from_json(j);
}

nlohmann::json roi_to_json(const RoI& roi) {
  auto polys = nlohmann::json::array();
  for (const auto& r : roi.rects()) {
    polys.push_back(nlohmann::json::array({nlohmann::json::array({
        {r.west(), r.south()},
        {r.east(), r.south()},
        {r.east(), r.north()},
        {r.west(), r.north()},
        {r.west(), r.south()},
    })}));
  }
  return {{"type", "MultiPolygon"}, {"coordinates", polys}};
}

}  // namespace geoflood
