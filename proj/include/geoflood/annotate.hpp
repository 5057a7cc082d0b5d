#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geoflood/geo.hpp"
#include "geoflood/geocode.hpp"
#include "geoflood/tweet.hpp"

namespace geoflood {

enum class AnnotationKind { Geotag, BBox, PBBox };

std::string_view kind_name(AnnotationKind k) noexcept;
std::optional<AnnotationKind> parse_kind(std::string_view s) noexcept;

/// (tweet id, type) plus either a point (geotag) or a place reference.
class Annotation {
 public:
  static Annotation geotag(std::string tweet_id, GeoPoint point);
  /// kind must be BBox or PBBox.
  static Annotation place(std::string tweet_id, AnnotationKind kind, std::string place_id);

  const std::string& tweet_id() const noexcept { return tweet_id_; }
  AnnotationKind kind() const noexcept { return kind_; }
  /// Valid only for geotag annotations.
  const GeoPoint& point() const noexcept { return point_; }
  /// Empty for geotag annotations.
  const std::string& place_id() const noexcept { return place_id_; }

  friend bool operator==(const Annotation&, const Annotation&) = default;

 private:
  Annotation() = default;
  std::string tweet_id_;
  AnnotationKind kind_ = AnnotationKind::Geotag;
  GeoPoint point_{};
  std::string place_id_;
};

enum class PlaceOrigin { TweetPlace, ProfileRecovered };

struct PlaceDoc {
  std::string place_id;
  std::string name;
  BBox bbox;
  PlaceOrigin origin = PlaceOrigin::TweetPlace;

  friend bool operator==(const PlaceDoc&, const PlaceDoc&) = default;
};

using PlaceIndex = std::map<std::string, PlaceDoc>;

/// Annotation collection plus the place collection it references.
struct AnnotationSet {
  std::vector<Annotation> annotations;
  PlaceIndex places;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

/// Throws Error(Integrity) if a place reference dangles.
void check_integrity(const AnnotationSet& set);

/// 64-bit FNV-1a over (normalized name, bbox rounded to 1e-6 deg), hex encoded with an "h" prefix.
std::string stable_place_id(std::string_view name, const BBox& bbox);

struct DerivationCounters {
  std::size_t tweets = 0;
  std::size_t geotag = 0;
  std::size_t bbox = 0;
  std::size_t pbbox = 0;
  std::size_t recovery_attempted = 0;
  std::size_t recovery_failed = 0;    // geocoder error (network, fixture miss)
  std::size_t recovery_no_match = 0;  // results returned, none contains the centroid

  nlohmann::json to_json() const;
};

struct DerivedAnnotation {
  Annotation annotation;
  std::optional<PlaceDoc> place;
};

/// geotag iff coordinates; bbox iff a tweet place; pbbox iff the geocoder
/// returns a box containing the derived centroid (the first such box wins).
/// Geocoder failures skip the pbbox and are counted; `geocoder` may be null,
/// in which case profile places are not recovered.
std::vector<DerivedAnnotation> derive_annotations(const TweetRecord& t, Geocoder* geocoder,
                                                  DerivationCounters& counters);

/// Derives annotations for a corpus; places are deduplicated by id (first seen wins).
AnnotationSet build_annotation_set(const std::vector<TweetRecord>& tweets, Geocoder* geocoder,
                                   DerivationCounters& counters);

struct KindCounts {
  std::size_t geotag = 0;
  std::size_t bbox = 0;
  std::size_t pbbox = 0;

  std::size_t total() const noexcept { return geotag + bbox + pbbox; }
  std::size_t& operator[](AnnotationKind k) noexcept;
  friend bool operator==(const KindCounts&, const KindCounts&) = default;
};

KindCounts count_kinds(const std::vector<Annotation>& annotations);

struct FilterReport {
  KindCounts input;
  KindCounts kept;
  KindCounts excluded;
  std::size_t places_input = 0;
  std::size_t places_kept = 0;
  std::size_t places_excluded = 0;

  double excluded_annotation_fraction() const noexcept;
  double excluded_place_fraction() const noexcept;
  nlohmann::json to_json() const;
};

struct FilterResult {
  AnnotationSet kept;
  FilterReport report;
};

/// Drops geotags outside the RoI, bbox annotations whose place misses the
/// RoI, and pbbox annotations of any tweet that lost one of those; then
/// prunes unreferenced places.
FilterResult roi_postfilter(const AnnotationSet& input, const RoI& roi);

enum class Subtype { Geotag, SmallBBox, LargeBBox, SmallPBBox, LargePBBox };

inline constexpr double kDefaultThresholdKm2 = 350.0;

std::string_view subtype_name(Subtype s) noexcept;
std::optional<Subtype> parse_subtype(std::string_view s) noexcept;
bool is_usable(Subtype s) noexcept;

/// Surface >= threshold is large. Throws Error(Validation) unless threshold > 0
/// (NaN rejected; +inf accepted), Error(Integrity) on a dangling place.
Subtype classify_specificity(const Annotation& a, const PlaceIndex& places, double threshold_km2);

}  // namespace geoflood
