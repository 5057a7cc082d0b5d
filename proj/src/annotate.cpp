#include "geoflood/annotate.hpp"

#include <cmath>
#include <unordered_set>

#include "geoflood/error.hpp"
#include "geoflood/text.hpp"

namespace geoflood {

std::string_view kind_name(AnnotationKind k) noexcept {
  switch (k) {
    case AnnotationKind::Geotag: return "geotag";
    case AnnotationKind::BBox: return "bbox";
    case AnnotationKind::PBBox: return "pbbox";
  }
  return "geotag";
}

std::optional<AnnotationKind> parse_kind(std::string_view s) noexcept {
  if (s == "geotag") return AnnotationKind::Geotag;
  if (s == "bbox") return AnnotationKind::BBox;
  if (s == "pbbox") return AnnotationKind::PBBox;
  return std::nullopt;
}

Annotation Annotation::geotag(std::string tweet_id, GeoPoint point) {
  Annotation a;
  a.tweet_id_ = std::move(tweet_id);
  a.kind_ = AnnotationKind::Geotag;
  a.point_ = make_point(point.lon, point.lat);
  return a;
}

Annotation Annotation::place(std::string tweet_id, AnnotationKind kind, std::string place_id) {
  if (kind == AnnotationKind::Geotag) {
    throw Error(ErrorCode::Validation, "place annotation cannot have kind geotag");
  }
  if (place_id.empty()) throw Error(ErrorCode::Validation, "place annotation needs a place id");
  Annotation a;
  a.tweet_id_ = std::move(tweet_id);
  a.kind_ = kind;
  a.place_id_ = std::move(place_id);
  return a;
}

void check_integrity(const AnnotationSet& set) {
  for (const auto& [id, doc] : set.places) {
    if (id != doc.place_id) throw Error(ErrorCode::Integrity, "place key mismatch for " + id);
  }
  for (const auto& a : set.annotations) {
    if (a.kind() == AnnotationKind::Geotag) continue;
    if (!set.places.contains(a.place_id())) {
      throw Error(ErrorCode::Integrity, "annotation of tweet " + a.tweet_id() +
                                            " references unknown place " + a.place_id());
    }
  }
}

std::string stable_place_id(std::string_view name, const BBox& bbox) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  mix(text::normalize_name(name));
  for (double v : {bbox.west(), bbox.south(), bbox.east(), bbox.north()}) {
    const auto micro = static_cast<long long>(std::llround(v * 1e6));
    mix("|");
    mix(std::to_string(micro));
  }
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out = "h";
  for (int shift = 60; shift >= 0; shift -= 4) out.push_back(kDigits[(h >> shift) & 0xF]);
  return out;
}

nlohmann::json DerivationCounters::to_json() const {
  return {{"tweets", tweets},
          {"geotag", geotag},
          {"bbox", bbox},
          {"pbbox", pbbox},
          {"recovery_attempted", recovery_attempted},
          {"recovery_failed", recovery_failed},
          {"recovery_no_match", recovery_no_match}};
}

std::vector<DerivedAnnotation> derive_annotations(const TweetRecord& t, Geocoder* geocoder,
                                                  DerivationCounters& counters) {
  std::vector<DerivedAnnotation> out;
  ++counters.tweets;
  if (t.coordinates) {
    out.push_back({Annotation::geotag(t.id, *t.coordinates), std::nullopt});
    ++counters.geotag;
  }
  if (t.place) {
    PlaceDoc doc{t.place->place_id.empty() ? stable_place_id(t.place->name, t.place->bbox)
                                           : t.place->place_id,
                 t.place->name, t.place->bbox, PlaceOrigin::TweetPlace};
    out.push_back({Annotation::place(t.id, AnnotationKind::BBox, doc.place_id), std::move(doc)});
    ++counters.bbox;
  }
  if (t.derived_place && geocoder != nullptr) {
    ++counters.recovery_attempted;
    std::vector<GeocodeResult> results;
    try {
      results = geocoder->search(t.derived_place->name);
    } catch (const Error&) {
      ++counters.recovery_failed;
      return out;
    }
    const GeocodeResult* hit = nullptr;
    for (const auto& r : results) {
      if (bbox_contains_point(r.bbox, t.derived_place->centroid)) {
        hit = &r;
        break;
      }
    }
    if (hit == nullptr) {
      ++counters.recovery_no_match;
      return out;
    }
    PlaceDoc doc{hit->provider_place_id.empty()
                     ? stable_place_id(t.derived_place->name, hit->bbox)
                     : "nominatim:" + hit->provider_place_id,
                 t.derived_place->name, hit->bbox, PlaceOrigin::ProfileRecovered};
    out.push_back({Annotation::place(t.id, AnnotationKind::PBBox, doc.place_id), std::move(doc)});
    ++counters.pbbox;
  }
  return out;
}

AnnotationSet build_annotation_set(const std::vector<TweetRecord>& tweets, Geocoder* geocoder,
                                   DerivationCounters& counters) {
  AnnotationSet set;
  for (const auto& t : tweets) {
    for (auto& d : derive_annotations(t, geocoder, counters)) {
      if (d.place) set.places.try_emplace(d.place->place_id, std::move(*d.place));
      set.annotations.push_back(std::move(d.annotation));
    }
  }
  return set;
}

std::size_t& KindCounts::operator[](AnnotationKind k) noexcept {
  switch (k) {
    case AnnotationKind::Geotag: return geotag;
    case AnnotationKind::BBox: return bbox;
    case AnnotationKind::PBBox: return pbbox;
  }
  return geotag;
}

KindCounts count_kinds(const std::vector<Annotation>& annotations) {
  KindCounts c;
  for (const auto& a : annotations) ++c[a.kind()];
  return c;
}

double FilterReport::excluded_annotation_fraction() const noexcept {
  return input.total() == 0 ? 0.0
                            : static_cast<double>(excluded.total()) /
                                  static_cast<double>(input.total());
}

double FilterReport::excluded_place_fraction() const noexcept {
  return places_input == 0 ? 0.0
                           : static_cast<double>(places_excluded) /
                                 static_cast<double>(places_input);
}

nlohmann::json FilterReport::to_json() const {
  auto kinds = [](const KindCounts& c) {
    return nlohmann::json{
        {"geotag", c.geotag}, {"bbox", c.bbox}, {"pbbox", c.pbbox}, {"total", c.total()}};
  };
  return {{"input", kinds(input)},
          {"kept", kinds(kept)},
          {"excluded", kinds(excluded)},
          {"places_input", places_input},
          {"places_kept", places_kept},
          {"places_excluded", places_excluded},
          {"excluded_annotation_fraction", excluded_annotation_fraction()},
          {"excluded_place_fraction", excluded_place_fraction()}};
}

FilterResult roi_postfilter(const AnnotationSet& input, const RoI& roi) {
  check_integrity(input);

  std::unordered_set<std::string> content_outside;
  auto outside = [&](const Annotation& a) {
    switch (a.kind()) {
      case AnnotationKind::Geotag: return !roi_overlaps_point(roi, a.point());
      case AnnotationKind::BBox:
        return !roi_overlaps_bbox(roi, input.places.at(a.place_id()).bbox);
      case AnnotationKind::PBBox: return false;
    }
    return false;
  };
  for (const auto& a : input.annotations) {
    if (outside(a)) content_outside.insert(a.tweet_id());
  }

  FilterResult result;
  for (const auto& a : input.annotations) {
    const bool drop = a.kind() == AnnotationKind::PBBox ? content_outside.contains(a.tweet_id())
                                                         : outside(a);
    if (!drop) result.kept.annotations.push_back(a);
  }
  for (const auto& a : result.kept.annotations) {
    if (a.kind() == AnnotationKind::Geotag) continue;
    result.kept.places.try_emplace(a.place_id(), input.places.at(a.place_id()));
  }

  auto& r = result.report;
  r.input = count_kinds(input.annotations);
  r.kept = count_kinds(result.kept.annotations);
  r.excluded = KindCounts{r.input.geotag - r.kept.geotag, r.input.bbox - r.kept.bbox,
                          r.input.pbbox - r.kept.pbbox};
  r.places_input = input.places.size();
  r.places_kept = result.kept.places.size();
  r.places_excluded = r.places_input - r.places_kept;
  return result;
}

std::string_view subtype_name(Subtype s) noexcept {
  switch (s) {
    case Subtype::Geotag: return "geotag";
    case Subtype::SmallBBox: return "s_bbox";
    case Subtype::LargeBBox: return "l_bbox";
    case Subtype::SmallPBBox: return "s_pbbox";
    case Subtype::LargePBBox: return "l_pbbox";
  }
  return "geotag";
}

std::optional<Subtype> parse_subtype(std::string_view s) noexcept {
  for (auto st : {Subtype::Geotag, Subtype::SmallBBox, Subtype::LargeBBox, Subtype::SmallPBBox,
                  Subtype::LargePBBox}) {
    if (subtype_name(st) == s) return st;
  }
  return std::nullopt;
}

bool is_usable(Subtype s) noexcept {
  return s == Subtype::Geotag || s == Subtype::SmallBBox || s == Subtype::SmallPBBox;
}

Subtype classify_specificity(const Annotation& a, const PlaceIndex& places, double threshold_km2) {
  if (!(threshold_km2 > 0.0)) {
    throw Error(ErrorCode::Validation, "specificity threshold must be > 0");
  }
  if (a.kind() == AnnotationKind::Geotag) return Subtype::Geotag;
  auto it = places.find(a.place_id());
  if (it == places.end()) throw Error(ErrorCode::Integrity, "unknown place " + a.place_id());
  const bool small = bbox_surface_km2(it->second.bbox) < threshold_km2;
  if (a.kind() == AnnotationKind::BBox) return small ? Subtype::SmallBBox : Subtype::LargeBBox;
  return small ? Subtype::SmallPBBox : Subtype::LargePBBox;
}

}  // namespace geoflood
