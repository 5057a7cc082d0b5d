#include "geoflood/synthetic.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

#include "geoflood/error.hpp"
#include "geoflood/text.hpp"

namespace geoflood {

namespace {

using nlohmann::json;

constexpr std::int64_t kPeriodStart = 1503100800;  // 2017-08-19T00:00:00Z
constexpr std::int64_t kPeriodEnd = 1506038399;    // 2017-09-21T23:59:59Z
constexpr std::uint64_t kFirstId = 899000000000000000ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string hex16(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::string num_str(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

const std::array<const char*, 40> kTownBases = {
    "Pasadena",    "Baytown",      "Katy",         "Sugar Land",  "Pearland",
    "Humble",      "Kingwood",     "Spring",       "Cypress",     "Tomball",
    "Conroe",      "League City",  "Friendswood",  "Dickinson",   "Texas City",
    "La Porte",    "Deer Park",    "Channelview",  "Galena Park", "Bellaire",
    "Missouri City", "Stafford",   "Richmond",     "Rosenberg",   "Wharton",
    "Bay City",    "El Campo",     "Victoria",     "Port Lavaca", "Rockport",
    "Beaumont",    "Port Arthur",  "Orange",       "Vidor",       "Dayton",
    "Liberty",     "Cleveland",    "Crosby",       "Atascocita",  "Seabrook"};

const std::array<const char*, 8> kTownSuffixes = {"",       " Heights", " Park",  " Village",
                                                  " Oaks",  " Creek",   " Lakes", " Meadows"};

const std::array<const char*, 12> kEuropeCities = {"Paris",  "Rome",   "Madrid", "Lisbon",
                                                   "Berlin", "Vienna", "Prague", "Munich",
                                                   "Milan",  "Nice",   "Lyon",   "Florence"};

const std::array<const char*, 14> kPlainTexts = {
    "Great coffee at the corner shop this morning",
    "Traffic on I-45 is terrible again",
    "Can't wait for the game tonight",
    "New episode dropped, no spoilers please",
    "Happy birthday to my best friend",
    "Working from home today",
    "Lunch with the team downtown",
    "This playlist is on repeat",
    "Finally finished that book, what an ending",
    "Gym time, leg day again",
    "Best tacos in town, no contest",
    "Who else is watching the concert stream",
    "Monday meetings all day long",
    "Sunset over the bay looks amazing"};

const std::array<const char*, 6> kKeywordNonRelevant = {
    "A flood of emails after the long weekend",
    "Watching an old Steve Harvey show tonight",
    "Harvey Street tacos are the best",
    "The flood of new releases this week is unreal",
    "My timeline is a flood of memes",
    "Harvey from accounting brought donuts"};

const std::array<const char*, 6> kPositive = {
    "Water is coming into our house, we need help #Harvey",
    "Flooding on our street, the car is under water",
    "Stuck on the roof, flood water rising, please send help",
    "Harvey flooded our first floor, we lost everything",
    "Our neighborhood is flooded, roads closed, need rescue",
    "Flood water up to the door, evacuating now"};

const std::array<const char*, 6> kNegative = {
    "We are safe and dry, Harvey missed our area",
    "No flooding here, everyone is fine",
    "Made it out before the flood, staying with family",
    "Power is back and we are safe after Harvey",
    "Thankful our home did not flood",
    "All good on our side of town, no flood damage"};

const std::array<const char*, 8> kTags = {"",         " #houston", " #txwx", " #htx",
                                          " lol",     " @friend",  " #texas", " 🙏"};

const char* kLongTail =
    " Updating everyone here because the phone lines are jammed and the news keeps showing the "
    "same three streets over and over, so this is the only way to reach people right now.";

template <std::size_t N>
const char* pick(std::mt19937_64& rng, const std::array<const char*, N>& pool) {
  std::uniform_int_distribution<std::size_t> d(0, N - 1);
  return pool[d(rng)];
}

std::discrete_distribution<std::size_t> weights_of(
    const std::vector<std::pair<std::string, double>>& entries) {
  std::vector<double> w;
  w.reserve(entries.size());
  for (const auto& e : entries) w.push_back(e.second);
  return std::discrete_distribution<std::size_t>(w.begin(), w.end());
}

void check_sources(const std::vector<std::pair<std::string, double>>& s, const char* what) {
  if (s.empty()) throw Error(ErrorCode::Config, std::string(what) + " must not be empty");
  double sum = 0.0;
  for (const auto& [name, w] : s) {
    if (!in_unit(w)) throw Error(ErrorCode::Config, std::string(what) + " weight outside [0,1]");
    if (name.empty()) throw Error(ErrorCode::Config, std::string(what) + " has an empty label");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::Config, std::string(what) + " weights must sum to 1");
  }
}

json sources_to_json(const std::vector<std::pair<std::string, double>>& s) {
  json out = json::object();
  for (const auto& [name, w] : s) out[name] = w;
  return out;
}

std::vector<std::pair<std::string, double>> sources_from_json(const json& j) {
  std::vector<std::pair<std::string, double>> out;
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) out.emplace_back(k, v.get<double>());
  } else if (j.is_array()) {
    for (const auto& e : j) out.emplace_back(e.at(0).get<std::string>(), e.at(1).get<double>());
  } else {
    throw Error(ErrorCode::Config, "source mix must be an object or a list of pairs");
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, double>> MixConfig::default_sources() {
  return {{"Twitter for iPhone", 0.40}, {"Twitter for Android", 0.24},
          {"Twitter Web Client", 0.12}, {"Facebook", 0.03},
          {"Instagram", 0.02},          {"Twitter for iPad", 0.01},
          {"TweetDeck", 0.01},          {"SocialOomph", 0.01},
          {"IFTTT", 0.01},              {"Hootsuite", 0.04},
          {"Buffer", 0.03},             {"dlvr.it", 0.03},
          {"CWIS Twitter Feed", 0.02},  {"TTN HOU Traffic", 0.03}};
}

std::vector<std::pair<std::string, double>> MixConfig::default_geotag_sources() {
  return {{"Instagram", 0.63},
          {"Twitter for iPhone", 0.17},
          {"Twitter for Android", 0.10},
          {"CWIS Twitter Feed", 0.05},
          {"TTN HOU Traffic", 0.05}};
}

void MixConfig::validate() const {
  for (double v : {geotag_share, bbox_share, pbbox_share, small_bbox_share, small_pbbox_share,
                   out_of_roi_share, keyword_share, long_text_share, decoy_share,
                   unrecoverable_share, small_bbox_place_share, small_pbbox_place_share}) {
    if (!in_unit(v)) throw Error(ErrorCode::Config, "mix proportion outside [0,1]");
  }
  if (std::abs(geotag_share + bbox_share + pbbox_share - 1.0) > 1e-9) {
    throw Error(ErrorCode::Config, "annotation-type shares must sum to 1");
  }
  if (out_of_roi_share >= 1.0) throw Error(ErrorCode::Config, "out_of_roi_share must be < 1");
  if (out_of_roi_share > 0.0 && geotag_share + bbox_share <= 0.0) {
    throw Error(ErrorCode::Config, "out-of-RoI tweets need a geotag or bbox share");
  }
  if (bbox_places < 2 || pbbox_places < 2) {
    throw Error(ErrorCode::Config, "place pools need at least 2 places each");
  }
  for (double v : {bbox_frequency_slope, bbox_frequency_noise, pbbox_frequency_slope,
                   pbbox_frequency_noise}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::Config, "frequency parameters must be finite");
  }
  check_sources(sources, "sources");
  check_sources(geotag_sources, "geotag_sources");
}

double MixConfig::expected_usable_fraction() const noexcept {
  return geotag_share + bbox_share * small_bbox_share + pbbox_share * small_pbbox_share;
}

double MixConfig::out_of_roi_tweet_probability() const noexcept {
  // Each out-of-RoI tweet carries two excluded annotations; others carry one kept.
  // f = 2q / (1 + q)  =>  q = f / (2 - f)
  return out_of_roi_share / (2.0 - out_of_roi_share);
}

MixConfig mix_from_json(const json& j) {
  MixConfig m;
  try {
    auto num = [&](const char* key, double& dst) {
      if (j.contains(key)) dst = j.at(key).get<double>();
    };
    auto count = [&](const char* key, std::size_t& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::size_t>();
    };
    num("geotag_share", m.geotag_share);
    num("bbox_share", m.bbox_share);
    num("pbbox_share", m.pbbox_share);
    num("small_bbox_share", m.small_bbox_share);
    num("small_pbbox_share", m.small_pbbox_share);
    num("out_of_roi_share", m.out_of_roi_share);
    num("keyword_share", m.keyword_share);
    num("long_text_share", m.long_text_share);
    num("decoy_share", m.decoy_share);
    num("unrecoverable_share", m.unrecoverable_share);
    num("small_bbox_place_share", m.small_bbox_place_share);
    num("small_pbbox_place_share", m.small_pbbox_place_share);
    count("bbox_places", m.bbox_places);
    count("pbbox_places", m.pbbox_places);
    num("bbox_frequency_slope", m.bbox_frequency_slope);
    num("bbox_frequency_noise", m.bbox_frequency_noise);
    num("pbbox_frequency_slope", m.pbbox_frequency_slope);
    num("pbbox_frequency_noise", m.pbbox_frequency_noise);
    if (j.contains("sources")) m.sources = sources_from_json(j.at("sources"));
    if (j.contains("geotag_sources")) m.geotag_sources = sources_from_json(j.at("geotag_sources"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("mix config: ") + e.what());
  }
  m.validate();
  return m;
}

json mix_to_json(const MixConfig& m) {
  return {{"geotag_share", m.geotag_share},
          {"bbox_share", m.bbox_share},
          {"pbbox_share", m.pbbox_share},
          {"small_bbox_share", m.small_bbox_share},
          {"small_pbbox_share", m.small_pbbox_share},
          {"out_of_roi_share", m.out_of_roi_share},
          {"keyword_share", m.keyword_share},
          {"long_text_share", m.long_text_share},
          {"decoy_share", m.decoy_share},
          {"unrecoverable_share", m.unrecoverable_share},
          {"small_bbox_place_share", m.small_bbox_place_share},
          {"small_pbbox_place_share", m.small_pbbox_place_share},
          {"bbox_places", m.bbox_places},
          {"pbbox_places", m.pbbox_places},
          {"bbox_frequency_slope", m.bbox_frequency_slope},
          {"bbox_frequency_noise", m.bbox_frequency_noise},
          {"pbbox_frequency_slope", m.pbbox_frequency_slope},
          {"pbbox_frequency_noise", m.pbbox_frequency_noise},
          {"sources", sources_to_json(m.sources)},
          {"geotag_sources", sources_to_json(m.geotag_sources)}};
}

MixConfig load_mix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open mix config " + path);
  try {
    return mix_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, "mix config " + path + ": " + e.what());
  }
}

SyntheticGenerator::SyntheticGenerator(MixConfig mix, std::uint64_t seed)
    : mix_(std::move(mix)), seed_(seed), roi_(default_roi()) {
  mix_.validate();
  std::seed_seq place_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          0x706c6163u};
  std::seed_seq tweet_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          0x74776565u};
  place_rng_.seed(place_seq);
  rng_.seed(tweet_seq);
  build_places();
  source_pick_ = weights_of(mix_.sources);
  geotag_source_pick_ = weights_of(mix_.geotag_sources);
}

SyntheticPlace SyntheticGenerator::make_place(std::mt19937_64& rng, double surface, bool small,
                                              std::string name, std::string id, double slope,
                                              double noise) {
  // Center: uniform inside one RoI rectangle chosen by area.
  std::vector<double> areas;
  for (const auto& r : roi_.rects()) areas.push_back(bbox_surface_km2(r));
  std::discrete_distribution<std::size_t> rect_pick(areas.begin(), areas.end());
  const auto& r = roi_.rects()[rect_pick(rng)];
  std::uniform_real_distribution<double> ulon(r.west(), r.east());
  std::uniform_real_distribution<double> ulat(r.south(), r.north());
  const double clon = ulon(rng);
  const double clat = ulat(rng);

  constexpr double kRad = std::numbers::pi / 180.0;
  const double aspect = log_uniform(rng, 0.6, 1.6);
  const double height_km = std::sqrt(surface / aspect);
  const double dlat = height_km / (kEarthRadiusKm * kRad);
  const double south = std::max(-89.0, clat - dlat / 2.0);
  const double north = std::min(89.0, clat + dlat / 2.0);
  const double band = std::sin(north * kRad) - std::sin(south * kRad);
  const double dlon = surface / (kEarthRadiusKm * kEarthRadiusKm * band) / kRad;
  const double west = std::max(-180.0, clon - dlon / 2.0);
  const double east = std::min(180.0, clon + dlon / 2.0);

  SyntheticPlace p;
  p.name = std::move(name);
  p.place_id = std::move(id);
  p.bbox = BBox(west, south, east, north);
  p.surface_km2 = bbox_surface_km2(p.bbox);
  p.small = small;
  std::normal_distribution<double> z(0.0, 1.0);
  const double eps = std::clamp(z(rng), -2.5, 2.5);
  p.weight = std::pow(10.0, slope * std::log10(p.surface_km2) + noise * eps);
  return p;
}

void SyntheticGenerator::build_places() {
  auto& rng = place_rng_;
  auto sample_surface = [&](bool small, bool profile) {
    if (small) return log_uniform(rng, profile ? 5.0 : 0.01, 340.0);
    return log_uniform(rng, 360.0, profile ? 3.0e4 : 7.0e5);
  };

  auto small_places = [](std::size_t n, double share) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(share * static_cast<double>(n))),
                                   1, n - 1);
  };
  const auto bbox_small_n = small_places(mix_.bbox_places, mix_.small_bbox_place_share);
  const auto pbbox_small_n = small_places(mix_.pbbox_places, mix_.small_pbbox_place_share);
  for (std::size_t i = 0; i < mix_.bbox_places; ++i) {
    const bool small = i < bbox_small_n;
    std::string name = std::string(kTownBases[i % kTownBases.size()]) + " Place " +
                       std::to_string(i) + ", TX";
    auto p = make_place(rng, sample_surface(small, false), small, std::move(name),
                        hex16(splitmix64(seed_ ^ (0xB0B0ULL + i))), mix_.bbox_frequency_slope,
                        mix_.bbox_frequency_noise);
    if (p.small != (p.surface_km2 < 350.0)) p.small = p.surface_km2 < 350.0;
    (p.small ? bbox_small_idx_ : bbox_large_idx_).push_back(bbox_places_.size());
    bbox_places_.push_back(std::move(p));
  }

  std::bernoulli_distribution decoy(mix_.decoy_share);
  for (std::size_t i = 0; i < mix_.pbbox_places; ++i) {
    const bool small = i < pbbox_small_n;
    const auto combo = i % (kTownBases.size() * kTownSuffixes.size());
    std::string name = std::string(kTownBases[combo % kTownBases.size()]) +
                       kTownSuffixes[combo / kTownBases.size()];
    if (i >= kTownBases.size() * kTownSuffixes.size()) {
      name += " " + std::to_string(i / (kTownBases.size() * kTownSuffixes.size()) + 1);
    }
    name += ", TX";
    auto p = make_place(rng, sample_surface(small, true), small, std::move(name),
                        std::to_string(200000 + 10 * i), mix_.pbbox_frequency_slope,
                        mix_.pbbox_frequency_noise);
    if (p.small != (p.surface_km2 < 350.0)) p.small = p.surface_km2 < 350.0;

    std::vector<BBox> decoys;
    if (decoy(rng)) {
      // Same-named place elsewhere: shifted north-east so it cannot hold the centroid.
      const auto& b = p.bbox;
      const double w = b.east() - b.west();
      const double h = b.north() - b.south();
      const double west = std::min(170.0, b.east() + w + 0.05);
      const double south = std::min(80.0, b.north() + h + 0.05);
      decoys.emplace_back(west, south, std::min(180.0, west + w), std::min(89.5, south + h));
    }
    decoys_.push_back(std::move(decoys));
    (p.small ? pbbox_small_idx_ : pbbox_large_idx_).push_back(pbbox_places_.size());
    pbbox_places_.push_back(std::move(p));
  }

  auto dist_of = [](const std::vector<SyntheticPlace>& places, const std::vector<std::size_t>& idx) {
    std::vector<double> w;
    for (auto i : idx) w.push_back(places[i].weight);
    if (w.empty()) w.push_back(1.0);
    return std::discrete_distribution<std::size_t>(w.begin(), w.end());
  };
  if (bbox_small_idx_.empty() || bbox_large_idx_.empty() || pbbox_small_idx_.empty() ||
      pbbox_large_idx_.empty()) {
    throw Error(ErrorCode::Config, "place pools must contain both small and large places");
  }
  bbox_small_pick_ = dist_of(bbox_places_, bbox_small_idx_);
  bbox_large_pick_ = dist_of(bbox_places_, bbox_large_idx_);
  pbbox_small_pick_ = dist_of(pbbox_places_, pbbox_small_idx_);
  pbbox_large_pick_ = dist_of(pbbox_places_, pbbox_large_idx_);
}

std::vector<double> SyntheticGenerator::expected_counts(PlannedKind kind, std::size_t n) const {
  const double in_roi = static_cast<double>(n) * (1.0 - mix_.out_of_roi_tweet_probability());
  const bool bbox = kind == PlannedKind::BBox;
  if (kind == PlannedKind::Geotag) return {};
  const auto& places = bbox ? bbox_places_ : pbbox_places_;
  const auto& small_idx = bbox ? bbox_small_idx_ : pbbox_small_idx_;
  const auto& large_idx = bbox ? bbox_large_idx_ : pbbox_large_idx_;
  const double share = bbox ? mix_.bbox_share : mix_.pbbox_share * (1.0 - mix_.unrecoverable_share);
  const double small_share = bbox ? mix_.small_bbox_share : mix_.small_pbbox_share;

  std::vector<double> out(places.size(), 0.0);
  auto fill = [&](const std::vector<std::size_t>& idx, double pool_share) {
    double total = 0.0;
    for (auto i : idx) total += places[i].weight;
    for (auto i : idx) out[i] = in_roi * share * pool_share * places[i].weight / total;
  };
  fill(small_idx, small_share);
  fill(large_idx, 1.0 - small_share);
  return out;
}

std::string SyntheticGenerator::pick_text(bool keyword, ClassLabel& relevance, bool long_text) {
  std::string body;
  if (keyword) {
    std::uniform_int_distribution<int> cls(0, 2);
    relevance = static_cast<ClassLabel>(cls(rng_));
    switch (relevance) {
      case ClassLabel::NonRelevant: body = pick(rng_, kKeywordNonRelevant); break;
      case ClassLabel::PositiveIndication: body = pick(rng_, kPositive); break;
      case ClassLabel::NegativeIndication: body = pick(rng_, kNegative); break;
    }
  } else {
    relevance = ClassLabel::NonRelevant;
    body = pick(rng_, kPlainTexts);
  }
  body += pick(rng_, kTags);
  if (long_text) body += kLongTail;
  return body;
}

SyntheticTweet SyntheticGenerator::next() {
  const std::size_t i = counter_++;
  SyntheticTweet out;
  auto& t = out.record;

  std::uniform_int_distribution<std::uint64_t> jitter(0, 999);
  t.id = std::to_string(kFirstId + static_cast<std::uint64_t>(i) * 1000 + jitter(rng_));
  std::uniform_int_distribution<std::int64_t> when(kPeriodStart, kPeriodEnd);
  t.created_at = Timestamp{std::chrono::seconds{when(rng_)}};

  std::bernoulli_distribution out_roi(mix_.out_of_roi_tweet_probability());
  out.out_of_roi = out_roi(rng_);

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto pick_pbbox = [&](SyntheticTweet& st) {
    std::bernoulli_distribution lost(mix_.unrecoverable_share);
    if (lost(rng_)) {
      st.recoverable = false;
      std::uniform_real_distribution<double> lon(-96.0, -94.5), lat(29.0, 30.2);
      st.record.derived_place = DerivedPlace{"Unmapped Locality " + std::to_string(i) + ", TX",
                                             GeoPoint{lon(rng_), lat(rng_)}};
      return;
    }
    std::bernoulli_distribution small(mix_.small_pbbox_share);
    const bool is_small = small(rng_);
    const std::size_t idx = is_small ? pbbox_small_idx_[pbbox_small_pick_(rng_)]
                                     : pbbox_large_idx_[pbbox_large_pick_(rng_)];
    st.place_index = idx;
    const auto& p = pbbox_places_[idx];
    st.record.derived_place = DerivedPlace{p.name, bbox_centroid(p.bbox)};
  };

  if (out.out_of_roi) {
    // Profile inside the RoI, content far away.
    const double g = mix_.geotag_share / (mix_.geotag_share + mix_.bbox_share);
    out.kind = u01(rng_) < g ? PlannedKind::Geotag : PlannedKind::BBox;
    std::uniform_real_distribution<double> lon(-5.0, 25.0), lat(38.0, 55.0);
    if (out.kind == PlannedKind::Geotag) {
      t.coordinates = GeoPoint{lon(rng_), lat(rng_)};
    } else {
      const double surface = log_uniform(rng_, 1.0, 1000.0);
      const double clon = lon(rng_), clat = lat(rng_);
      const double half = std::sqrt(surface) / 111.195 / 2.0;
      const double half_lon = half / std::cos(clat * std::numbers::pi / 180.0);
      std::string name = std::string(pick(rng_, kEuropeCities)) + " " + std::to_string(i);
      t.place = TweetPlace{std::move(name),
                           BBox(clon - half_lon, clat - half, clon + half_lon, clat + half),
                           hex16(splitmix64(seed_ ^ (0xE0E0E0E0ULL + i)))};
    }
    pick_pbbox(out);
  } else {
    const double r = u01(rng_);
    if (r < mix_.geotag_share) {
      out.kind = PlannedKind::Geotag;
      std::vector<double> areas;
      for (const auto& rect : roi_.rects()) areas.push_back(bbox_surface_km2(rect));
      std::discrete_distribution<std::size_t> rect_pick(areas.begin(), areas.end());
      const auto& rect = roi_.rects()[rect_pick(rng_)];
      std::uniform_real_distribution<double> lon(rect.west(), rect.east());
      std::uniform_real_distribution<double> lat(rect.south(), rect.north());
      t.coordinates = GeoPoint{lon(rng_), lat(rng_)};
    } else if (r < mix_.geotag_share + mix_.bbox_share) {
      out.kind = PlannedKind::BBox;
      std::bernoulli_distribution small(mix_.small_bbox_share);
      const bool is_small = small(rng_);
      const std::size_t idx = is_small ? bbox_small_idx_[bbox_small_pick_(rng_)]
                                       : bbox_large_idx_[bbox_large_pick_(rng_)];
      out.place_index = idx;
      const auto& p = bbox_places_[idx];
      t.place = TweetPlace{p.name, p.bbox, p.place_id};
    } else {
      out.kind = PlannedKind::PBBox;
      pick_pbbox(out);
    }
  }

  if (t.derived_place) {
    std::bernoulli_distribution freeform(0.8);
    if (freeform(rng_)) {
      const auto& name = t.derived_place->name;
      t.user_location_freeform = name.substr(0, name.find(','));
    }
  }

  t.source_label = out.kind == PlannedKind::Geotag
                       ? mix_.geotag_sources[geotag_source_pick_(rng_)].first
                       : mix_.sources[source_pick_(rng_)].first;

  std::bernoulli_distribution kw(mix_.keyword_share), long_text(mix_.long_text_share);
  out.has_keyword = kw(rng_);
  const bool is_long = long_text(rng_);
  t.text = pick_text(out.has_keyword, out.relevance, is_long);
  return out;
}

json SyntheticGenerator::geocoder_fixture() const {
  json fixture = json::object();
  for (std::size_t i = 0; i < pbbox_places_.size(); ++i) {
    const auto& p = pbbox_places_[i];
    auto result = [&](const BBox& b, long id) {
      const auto c = bbox_centroid(b);
      return json{{"place_id", id},
                  {"osm_type", "relation"},
                  {"category", "boundary"},
                  {"type", "administrative"},
                  {"display_name", p.name.substr(0, p.name.find(',')) + ", Texas, United States"},
                  {"lat", num_str(c.lat)},
                  {"lon", num_str(c.lon)},
                  {"boundingbox",
                   {num_str(b.south()), num_str(b.north()), num_str(b.west()), num_str(b.east())}}};
    };
    json list = json::array();
    const long base = std::stol(p.place_id);
    for (std::size_t d = 0; d < decoys_[i].size(); ++d) {
      list.push_back(result(decoys_[i][d], base + 1 + static_cast<long>(d)));
    }
    list.push_back(result(p.bbox, base));
    fixture[text::normalize_name(p.name)] = std::move(list);
  }
  return fixture;
}

std::vector<std::string> generate_synthetic(std::size_t n, const MixConfig& mix,
                                            std::uint64_t seed) {
  std::vector<std::string> lines;
  lines.reserve(n);
  if (n == 0) {
    mix.validate();
    return lines;
  }
  SyntheticGenerator gen(mix, seed);
  for (std::size_t i = 0; i < n; ++i) lines.push_back(serialize_tweet(gen.next().record));
  return lines;
}

void generate_synthetic(std::size_t n, const MixConfig& mix, std::uint64_t seed,
                        std::ostream& out) {
  if (n == 0) {
    mix.validate();
    return;
  }
  SyntheticGenerator gen(mix, seed);
  for (std::size_t i = 0; i < n; ++i) out << serialize_tweet(gen.next().record) << '\n';
}

}  // namespace geoflood
