#include "geoflood/pipeline.hpp"

#include <istream>
#include <unordered_set>

#include "geoflood/error.hpp"
#include "geoflood/stats.hpp"

namespace geoflood {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxReportedErrors = 100;

json kinds_json(const KindCounts& c) {
  return {{"geotag", c.geotag}, {"bbox", c.bbox}, {"pbbox", c.pbbox}, {"total", c.total()}};
}

double ratio(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

}  // namespace

json run_ingest(std::istream& in, const StorePaths& paths) {
  fs::create_directories(paths.dir);
  auto result = read_ndjson(in);

  std::vector<TweetRecord> kept;
  kept.reserve(result.records.size());
  std::unordered_set<std::string> seen;
  std::size_t duplicates = 0;
  for (auto& r : result.records) {
    if (!seen.insert(r.id).second) {
      ++duplicates;
      continue;
    }
    kept.push_back(std::move(r));
  }
  write_tweets(paths.tweets(), kept);

  std::map<std::string, std::size_t> by_code;
  auto errors = json::array();
  for (const auto& e : result.errors) {
    ++by_code[std::string(code_name(e.code))];
    if (errors.size() < kMaxReportedErrors) {
      errors.push_back({{"line", e.line}, {"code", code_name(e.code)}, {"message", e.message}});
    }
  }
  json report = {{"records", kept.size()},
                 {"duplicate_ids", duplicates},
                 {"blank_lines", result.blank_lines},
                 {"error_lines", result.errors.size()},
                 {"errors_by_code", by_code},
                 {"errors", std::move(errors)}};
  write_json(paths.ingest_report(), report);
  return report;
}

json run_annotate(const StorePaths& paths, Geocoder* geocoder) {
  const auto tweets = read_tweets(paths.tweets());
  DerivationCounters counters;
  const auto set = build_annotation_set(tweets, geocoder, counters);
  write_annotation_set(paths.annotations_raw(), paths.places_raw(), set);
  json report = counters.to_json();
  report["annotations"] = set.annotations.size();
  report["places"] = set.places.size();
  if (geocoder) {
    report["geocoder_requests"] = geocoder->backend_requests();
    report["geocoder_cache_hits"] = geocoder->cache_hits();
  }
  write_json(paths.annotate_report(), report);
  return report;
}

json run_postfilter(const StorePaths& paths, const RoI& roi) {
  const auto raw = read_annotation_set(paths.annotations_raw(), paths.places_raw());
  auto result = roi_postfilter(raw, roi);
  write_annotation_set(paths.annotations(), paths.places(), result.kept);
  json report = result.report.to_json();
  report["roi"] = roi_to_json(roi);
  write_json(paths.filter_report(), report);
  return report;
}

json build_report(const StorePaths& paths, double threshold_km2) {
  const auto store = load_store(paths.dir);
  const auto raw = read_annotation_set(paths.annotations_raw(), paths.places_raw());
  const auto raw_counts = count_kinds(raw.annotations);
  const auto kept_counts = count_kinds(store.set.annotations);

  const auto cross = cross_distribution(store.set, store.tweets, threshold_km2);
  json subtypes = json::object();
  for (const auto& [st, sources] : cross) {
    std::size_t n = 0;
    for (const auto& [src, c] : sources) n += c;
    subtypes[std::string(subtype_name(st))] = n;
  }
  const auto excluded_annotations = raw_counts.total() - kept_counts.total();
  const auto excluded_places = raw.places.size() - store.set.places.size();

  json report = {
      {"tweets", store.tweets.size()},
      {"annotations", {{"raw", kinds_json(raw_counts)}, {"kept", kinds_json(kept_counts)}}},
      {"distinct_places", {{"raw", raw.places.size()}, {"kept", store.set.places.size()}}},
      {"excluded",
       {{"annotations", excluded_annotations},
        {"places", excluded_places},
        {"annotation_fraction", ratio(excluded_annotations, raw_counts.total())},
        {"place_fraction", ratio(excluded_places, raw.places.size())}}},
      {"geotag_share", ratio(kept_counts.geotag, kept_counts.total())},
      {"threshold_km2", threshold_km2},
      {"subtypes", std::move(subtypes)},
      {"usable_fraction", kept_counts.total() == 0 ? json(nullptr) : json(usable_fraction(cross))}};
  if (fs::exists(paths.annotate_report())) {
    const auto ar = read_json(paths.annotate_report());
    report["recovery"] = {{"attempted", ar.value("recovery_attempted", 0)},
                          {"failed", ar.value("recovery_failed", 0)},
                          {"no_match", ar.value("recovery_no_match", 0)}};
  }
  return report;
}

}  // namespace geoflood
