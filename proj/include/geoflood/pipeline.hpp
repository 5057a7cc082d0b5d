#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "geoflood/annotate.hpp"
#include "geoflood/geo.hpp"
#include "geoflood/geocode.hpp"
#include "geoflood/store.hpp"

namespace geoflood {

/// NDJSON -> tweets.ndjson + ingest_report.json. Bad lines are reported, not fatal.
nlohmann::json run_ingest(std::istream& in, const StorePaths& paths);

/// tweets.ndjson -> raw annotation/place collections + annotate_report.json.
nlohmann::json run_annotate(const StorePaths& paths, Geocoder* geocoder);

/// Raw collections -> RoI-filtered collections + filter_report.json.
/// Reads the raw files, so rerunning with a different RoI is safe.
nlohmann::json run_postfilter(const StorePaths& paths, const RoI& roi);

/// Headline aggregates of a processed store: annotation counts, distinct
/// places, excluded fractions, geotag share and usable fraction.
nlohmann::json build_report(const StorePaths& paths, double threshold_km2 = kDefaultThresholdKm2);

}  // namespace geoflood
