#include "geoflood/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>

#include "geoflood/error.hpp"

namespace geoflood {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return in;
}

template <typename F>
void for_each_line(const fs::path& path, F&& f) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      f(line);
    } catch (const Error& e) {
      throw Error(ErrorCode::Format,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

json annotation_to_json(const Annotation& a) {
  json j = {{"tweet_id", a.tweet_id()}, {"type", kind_name(a.kind())}};
  if (a.kind() == AnnotationKind::Geotag) {
    j["coordinates"] = {a.point().lon, a.point().lat};
  } else {
    j["place_id"] = a.place_id();
  }
  return j;
}

Annotation annotation_from_json(const json& j) {
  const auto kind = parse_kind(j.at("type").get<std::string>());
  if (!kind) throw Error(ErrorCode::Format, "unknown annotation type " + j.at("type").dump());
  auto id = j.at("tweet_id").get<std::string>();
  if (*kind == AnnotationKind::Geotag) {
    if (j.contains("place_id")) throw Error(ErrorCode::Format, "geotag annotation with place_id");
    const auto& c = j.at("coordinates");
    return Annotation::geotag(std::move(id), GeoPoint{c.at(0).get<double>(), c.at(1).get<double>()});
  }
  if (j.contains("coordinates")) throw Error(ErrorCode::Format, "place annotation with coordinates");
  return Annotation::place(std::move(id), *kind, j.at("place_id").get<std::string>());
}

json place_to_json(const PlaceDoc& p) {
  return {{"place_id", p.place_id},
          {"name", p.name},
          {"bbox", bbox_to_json(p.bbox)},
          {"origin", p.origin == PlaceOrigin::TweetPlace ? "tweet-place" : "profile-recovered"}};
}

PlaceDoc place_from_json(const json& j) {
  PlaceDoc p;
  p.place_id = j.at("place_id").get<std::string>();
  p.name = j.at("name").get<std::string>();
  p.bbox = bbox_from_json(j.at("bbox"));
  const auto origin = j.at("origin").get<std::string>();
  if (origin == "tweet-place") {
    p.origin = PlaceOrigin::TweetPlace;
  } else if (origin == "profile-recovered") {
    p.origin = PlaceOrigin::ProfileRecovered;
  } else {
    throw Error(ErrorCode::Format, "unknown place origin " + origin);
  }
  return p;
}

void write_tweets(const fs::path& path, const std::vector<TweetRecord>& tweets) {
  auto out = open_out(path);
  for (const auto& t : tweets) out << serialize_tweet(t) << '\n';
}

std::vector<TweetRecord> read_tweets(const fs::path& path) {
  std::vector<TweetRecord> out;
  for_each_line(path, [&](const std::string& line) { out.push_back(parse_tweet(line)); });
  return out;
}

void write_annotation_set(const fs::path& annotations_path, const fs::path& places_path,
                          const AnnotationSet& set) {
  {
    auto out = open_out(annotations_path);
    for (const auto& a : set.annotations) out << annotation_to_json(a).dump() << '\n';
  }
  auto out = open_out(places_path);
  for (const auto& [id, p] : set.places) out << place_to_json(p).dump() << '\n';
}

AnnotationSet read_annotation_set(const fs::path& annotations_path, const fs::path& places_path) {
  AnnotationSet set;
  for_each_line(places_path, [&](const std::string& line) {
    auto p = place_from_json(json::parse(line));
    auto id = p.place_id;
    if (!set.places.try_emplace(id, std::move(p)).second) {
      throw Error(ErrorCode::Integrity, "duplicate place id " + id);
    }
  });
  for_each_line(annotations_path, [&](const std::string& line) {
    set.annotations.push_back(annotation_from_json(json::parse(line)));
  });
  return set;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

Store load_store(const fs::path& dir) {
  StorePaths paths{dir};
  if (!fs::exists(paths.annotations()) || !fs::exists(paths.places())) {
    throw Error(ErrorCode::Integrity,
                "store " + dir.string() + " has no filtered collections (run postfilter first)");
  }
  Store store;
  store.tweets = read_tweets(paths.tweets());
  store.set = read_annotation_set(paths.annotations(), paths.places());
  check_integrity(store.set);
  return store;
}

StoreLock::StoreLock(const fs::path& dir) {
  fs::create_directories(dir);
  const auto path = StorePaths{dir}.lock();
  fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::Io, "cannot open lock file " + path.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::Io, "store " + dir.string() + " is locked by another process");
  }
}

StoreLock::~StoreLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace geoflood
