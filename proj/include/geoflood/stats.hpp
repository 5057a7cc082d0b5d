#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflood/annotate.hpp"
#include "geoflood/tweet.hpp"

namespace geoflood {

struct PlaceFrequency {
  std::string place_id;
  std::string name;
  double surface_km2 = 0.0;
  std::size_t count = 0;

  friend bool operator==(const PlaceFrequency&, const PlaceFrequency&) = default;
};

/// One row per place referenced by annotations of `kind` (bbox or pbbox),
/// ordered by place id.
std::vector<PlaceFrequency> place_frequencies(const AnnotationSet& set, AnnotationKind kind);

namespace stats {

/// I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);
/// Two-sided p-value of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);
/// Two-sided p-value of a standard normal deviate.
double normal_two_sided_p(double z);

/// Throws Error(InsufficientData) for n < 2 and Error(Undefined) if either side is constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

struct KendallResult {
  double tau_b = 0.0;
  double p_value = 1.0;  // tie-adjusted normal approximation
  std::int64_t s = 0;    // concordant - discordant
  std::int64_t n_pairs = 0;
  std::int64_t x_tied_pairs = 0;
  std::int64_t y_tied_pairs = 0;
};

/// O(n log n) tau-b (sort + merge-sort inversion count).
KendallResult kendall_tau_b(std::span<const double> x, std::span<const double> y);

}  // namespace stats

struct CorrelationReport {
  double pearson_r = 0.0;
  double pearson_p = 1.0;
  double kendall_tau = 0.0;
  double kendall_p = 1.0;
  std::size_t n = 0;
  std::size_t excluded_zero_surface = 0;
  bool log_transform = true;

  nlohmann::json to_json() const;
};

/// Pearson and Kendall on two paired samples (n >= 3).
CorrelationReport correlate(std::span<const double> x, std::span<const double> y);

/// Correlation of surface vs frequency, on log10 values unless `log_transform`
/// is false. Zero-surface places are dropped and counted.
CorrelationReport correlate_loglog(const std::vector<PlaceFrequency>& pf, bool log_transform = true);

/// subtype -> source label -> annotation count.
using CrossDistribution = std::map<Subtype, std::map<std::string, std::size_t>>;

/// Every annotation counted once. Annotations whose tweet is not in `tweets`
/// are attributed to the source "(unknown)".
CrossDistribution cross_distribution(const AnnotationSet& set,
                                     const std::vector<TweetRecord>& tweets, double threshold_km2);

std::size_t total_count(const CrossDistribution& cross);
nlohmann::json cross_distribution_to_json(const CrossDistribution& cross);

/// (geotag + s_bbox + s_pbbox) / total. Throws Error(Undefined) when empty.
double usable_fraction(const CrossDistribution& cross);

struct WhatIfResult {
  std::size_t retained_small_annotations = 0;  // geotag + s_bbox + s_pbbox
  std::size_t geotag = 0;
  std::size_t small_bbox = 0;
  std::size_t small_pbbox = 0;
  std::size_t retained_places = 0;  // distinct referenced places below the threshold
  std::size_t total_annotations = 0;
  std::optional<double> usable_fraction;  // empty when there are no annotations

  friend bool operator==(const WhatIfResult&, const WhatIfResult&) = default;
  nlohmann::json to_json() const;
};

/// Threshold may be 0 (nothing small) or +inf (everything small).
WhatIfResult threshold_whatif(const AnnotationSet& set, double threshold_km2);

std::string scatter_to_csv(const std::vector<PlaceFrequency>& pf);
nlohmann::json scatter_to_json(const std::vector<PlaceFrequency>& pf);

}  // namespace geoflood
