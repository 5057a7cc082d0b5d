#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geoflood/geo.hpp"
#include "geoflood/labels.hpp"
#include "geoflood/tweet.hpp"

namespace geoflood {

/// Target proportions for the synthetic corpus. Kind shares describe the
/// annotations that survive the RoI post-filter; `out_of_roi_share` is the
/// fraction of all annotations the post-filter should remove.
struct MixConfig {
  double geotag_share = 0.01;
  double bbox_share = 0.59;
  double pbbox_share = 0.40;
  double small_bbox_share = 0.16;   // geotag + 0.59*0.16 + 0.40*0.174 = 0.174 usable
  double small_pbbox_share = 0.174;
  double out_of_roi_share = 0.02;
  double keyword_share = 0.10;
  double long_text_share = 0.05;
  double decoy_share = 0.25;          // profile names whose first geocoder hit misses the centroid
  double unrecoverable_share = 0.0;   // profile names missing from the gazetteer
  // Fraction of each place pool drawn below the threshold.
  double small_bbox_place_share = 0.5;
  double small_pbbox_place_share = 0.174;
  std::size_t bbox_places = 400;
  std::size_t pbbox_places = 200;
  // log10(frequency weight) = slope * log10(surface) + noise * N(0,1)
  double bbox_frequency_slope = 0.35;
  double bbox_frequency_noise = 0.50;
  double pbbox_frequency_slope = 0.17;
  double pbbox_frequency_noise = 0.30;
  std::vector<std::pair<std::string, double>> sources = default_sources();
  std::vector<std::pair<std::string, double>> geotag_sources = default_geotag_sources();

  static std::vector<std::pair<std::string, double>> default_sources();
  static std::vector<std::pair<std::string, double>> default_geotag_sources();

  /// Throws Error(Config) on proportions outside [0,1] or shares not summing to 1.
  void validate() const;

  /// Expected fraction of kept annotations that are geotag / s_bbox / s_pbbox.
  double expected_usable_fraction() const noexcept;
  /// Per-tweet probability of an out-of-RoI tweet (each carries two annotations).
  double out_of_roi_tweet_probability() const noexcept;
};

MixConfig mix_from_json(const nlohmann::json& j);
nlohmann::json mix_to_json(const MixConfig& m);
MixConfig load_mix(const std::string& path);

enum class PlannedKind { Geotag, BBox, PBBox };

struct SyntheticPlace {
  std::string name;
  std::string place_id;  // Twitter hex id for bbox places, numeric gazetteer id for pbbox places
  BBox bbox;
  double surface_km2 = 0.0;
  double weight = 0.0;  // relative draw frequency within its (kind, size) pool
  bool small = false;
};

struct SyntheticTweet {
  TweetRecord record;
  PlannedKind kind = PlannedKind::Geotag;
  bool out_of_roi = false;
  bool has_keyword = false;
  bool recoverable = true;  // pbbox name present in the gazetteer
  ClassLabel relevance = ClassLabel::NonRelevant;
  std::size_t place_index = 0;  // into bbox_places()/pbbox_places() when applicable
};

/// Deterministic corpus generator. The place tables are drawn first from
/// the seed, then tweets are produced on demand.
class SyntheticGenerator {
 public:
  SyntheticGenerator(MixConfig mix, std::uint64_t seed);

  SyntheticTweet next();

  const MixConfig& mix() const noexcept { return mix_; }
  const std::vector<SyntheticPlace>& bbox_places() const noexcept { return bbox_places_; }
  const std::vector<SyntheticPlace>& pbbox_places() const noexcept { return pbbox_places_; }

  /// Geocoder replay fixture: normalized name -> Nominatim jsonv2 result list.
  nlohmann::json geocoder_fixture() const;

  /// Expected annotation count of each place for an n-tweet corpus.
  std::vector<double> expected_counts(PlannedKind kind, std::size_t n) const;

 private:
  void build_places();
  SyntheticPlace make_place(std::mt19937_64& rng, double surface, bool small, std::string name,
                            std::string id, double slope, double noise);
  std::string pick_text(bool keyword, ClassLabel& relevance, bool long_text);

  MixConfig mix_;
  std::uint64_t seed_;
  std::mt19937_64 place_rng_;
  std::mt19937_64 rng_;
  RoI roi_;
  std::vector<SyntheticPlace> bbox_places_;
  std::vector<SyntheticPlace> pbbox_places_;
  std::vector<std::vector<BBox>> decoys_;  // per pbbox place, boxes listed before the real hit
  std::discrete_distribution<std::size_t> bbox_small_pick_, bbox_large_pick_;
  std::discrete_distribution<std::size_t> pbbox_small_pick_, pbbox_large_pick_;
  std::vector<std::size_t> bbox_small_idx_, bbox_large_idx_, pbbox_small_idx_, pbbox_large_idx_;
  std::discrete_distribution<std::size_t> source_pick_, geotag_source_pick_;
  std::size_t counter_ = 0;
};

/// n raw tweet JSON lines; deterministic for (n, mix, seed).
std::vector<std::string> generate_synthetic(std::size_t n, const MixConfig& mix,
                                            std::uint64_t seed);
void generate_synthetic(std::size_t n, const MixConfig& mix, std::uint64_t seed,
                        std::ostream& out);

}  // namespace geoflood
