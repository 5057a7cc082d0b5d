#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflood/annotate.hpp"
#include "geoflood/tweet.hpp"

namespace geoflood {

/// On-disk layout of a processed store. Stages exchange data only through
/// these NDJSON/JSON files.
struct StorePaths {
  std::filesystem::path dir;

  std::filesystem::path tweets() const { return dir / "tweets.ndjson"; }
  std::filesystem::path ingest_report() const { return dir / "ingest_report.json"; }
  std::filesystem::path annotations_raw() const { return dir / "annotations.raw.ndjson"; }
  std::filesystem::path places_raw() const { return dir / "places.raw.ndjson"; }
  std::filesystem::path annotate_report() const { return dir / "annotate_report.json"; }
  std::filesystem::path annotations() const { return dir / "annotations.ndjson"; }
  std::filesystem::path places() const { return dir / "places.ndjson"; }
  std::filesystem::path filter_report() const { return dir / "filter_report.json"; }
  std::filesystem::path lock() const { return dir / ".lock"; }
};

nlohmann::json annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const nlohmann::json& j);
nlohmann::json place_to_json(const PlaceDoc& p);
PlaceDoc place_from_json(const nlohmann::json& j);

void write_tweets(const std::filesystem::path& path, const std::vector<TweetRecord>& tweets);
/// Strict: any bad line is an Error(Format) naming the line.
std::vector<TweetRecord> read_tweets(const std::filesystem::path& path);

void write_annotation_set(const std::filesystem::path& annotations_path,
                          const std::filesystem::path& places_path, const AnnotationSet& set);
AnnotationSet read_annotation_set(const std::filesystem::path& annotations_path,
                                  const std::filesystem::path& places_path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Immutable snapshot of a post-filtered store.
struct Store {
  std::vector<TweetRecord> tweets;
  AnnotationSet set;
};

/// Loads tweets plus the filtered annotation/place collections and checks
/// foreign-key integrity.
Store load_store(const std::filesystem::path& dir);

/// Exclusive advisory lock on the store directory (one process at a time).
class StoreLock {
 public:
  explicit StoreLock(const std::filesystem::path& dir);
  ~StoreLock();
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace geoflood
