#include "geoflood/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "geoflood/error.hpp"

namespace geoflood {

std::vector<PlaceFrequency> place_frequencies(const AnnotationSet& set, AnnotationKind kind) {
  if (kind == AnnotationKind::Geotag) {
    throw Error(ErrorCode::Request, "place frequencies are defined for bbox and pbbox only");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& a : set.annotations) {
    if (a.kind() == kind) ++counts[a.place_id()];
  }
  std::vector<PlaceFrequency> out;
  out.reserve(counts.size());
  for (const auto& [id, count] : counts) {
    auto it = set.places.find(id);
    if (it == set.places.end()) throw Error(ErrorCode::Integrity, "unknown place " + id);
    out.push_back({id, it->second.name, bbox_surface_km2(it->second.bbox), count});
  }
  return out;
}

namespace stats {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::Validation, "beta parameters must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::Validation, "beta argument outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::Validation, "degrees of freedom must be > 0");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::Request, "samples differ in length");
  const auto n = x.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "correlation needs at least 2 pairs");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::Undefined, "correlation undefined for constant input");
  }
  double r = sxy / std::sqrt(sxx * syy);
  // Exactly collinear data can land a few ulps short of +-1.
  if (std::abs(r) > 1.0 - 8.0 * kEps) r = std::copysign(1.0, r);
  return r;
}

namespace {

// Counts inversions of v while merge-sorting it in place.
std::int64_t sort_count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                   std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = sort_count_inversions(v, buf, lo, mid) + sort_count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

struct TieSums {
  std::int64_t pairs = 0;  // sum t(t-1)/2
  double v = 0.0;          // sum t(t-1)(2t+5)
  double v1 = 0.0;         // sum t(t-1)
  double v2 = 0.0;         // sum t(t-1)(t-2)
};

// `sorted` must already be sorted.
TieSums tie_sums(std::span<const double> sorted) {
  TieSums s;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    if (t > 1) {
      const double td = static_cast<double>(t);
      s.pairs += t * (t - 1) / 2;
      s.v += td * (td - 1.0) * (2.0 * td + 5.0);
      s.v1 += td * (td - 1.0);
      s.v2 += td * (td - 1.0) * (td - 2.0);
    }
    i = j;
  }
  return s;
}

}  // namespace

KendallResult kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::Request, "samples differ in length");
  const auto n = x.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "correlation needs at least 2 pairs");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }

  // Pairs tied on both coordinates.
  std::int64_t joint = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    joint += t * (t - 1) / 2;
    i = j;
  }
  const TieSums xt = tie_sums(xs);

  std::vector<double> buf(n);
  const std::int64_t swaps = sort_count_inversions(ys, buf, 0, n);
  const TieSums yt = tie_sums(ys);

  const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  KendallResult r;
  r.n_pairs = n0;
  r.x_tied_pairs = xt.pairs;
  r.y_tied_pairs = yt.pairs;
  r.s = n0 - xt.pairs - yt.pairs + joint - 2 * swaps;
  const double denom = std::sqrt(static_cast<double>(n0 - xt.pairs)) *
                       std::sqrt(static_cast<double>(n0 - yt.pairs));
  if (denom == 0.0) throw Error(ErrorCode::Undefined, "tau undefined for constant input");
  r.tau_b = std::clamp(static_cast<double>(r.s) / denom, -1.0, 1.0);
  if (n0 - xt.pairs == n0 - yt.pairs && std::abs(r.s) == n0 - xt.pairs) {
    r.tau_b = r.s > 0 ? 1.0 : -1.0;
  }

  const double nd = static_cast<double>(n);
  const double v0 = nd * (nd - 1.0) * (2.0 * nd + 5.0);
  double var = (v0 - xt.v - yt.v) / 18.0;
  var += xt.v1 * yt.v1 / (2.0 * nd * (nd - 1.0));
  if (n > 2) var += xt.v2 * yt.v2 / (9.0 * nd * (nd - 1.0) * (nd - 2.0));
  r.p_value = var > 0.0 ? normal_two_sided_p(static_cast<double>(r.s) / std::sqrt(var)) : 1.0;
  return r;
}

}  // namespace stats

nlohmann::json CorrelationReport::to_json() const {
  return {{"pearson_r", pearson_r},     {"pearson_p", pearson_p},
          {"kendall_tau", kendall_tau}, {"kendall_p", kendall_p},
          {"n", n},                     {"excluded_zero_surface", excluded_zero_surface},
          {"log_transform", log_transform}};
}

CorrelationReport correlate(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 3) throw Error(ErrorCode::InsufficientData, "correlation needs n >= 3");
  CorrelationReport rep;
  rep.n = x.size();
  rep.pearson_r = stats::pearson_r(x, y);
  const double df = static_cast<double>(rep.n) - 2.0;
  if (std::abs(rep.pearson_r) == 1.0) {
    rep.pearson_p = 0.0;
  } else {
    const double t = rep.pearson_r * std::sqrt(df / (1.0 - rep.pearson_r * rep.pearson_r));
    rep.pearson_p = stats::student_t_two_sided_p(t, df);
  }
  const auto k = stats::kendall_tau_b(x, y);
  rep.kendall_tau = k.tau_b;
  rep.kendall_p = k.p_value;
  return rep;
}

CorrelationReport correlate_loglog(const std::vector<PlaceFrequency>& pf, bool log_transform) {
  std::vector<double> xs, ys;
  std::size_t zero = 0;
  for (const auto& row : pf) {
    if (!(row.surface_km2 > 0.0)) {
      ++zero;
      continue;
    }
    const double s = row.surface_km2;
    const double c = static_cast<double>(row.count);
    xs.push_back(log_transform ? std::log10(s) : s);
    ys.push_back(log_transform ? std::log10(c) : c);
  }
  auto rep = correlate(xs, ys);
  rep.excluded_zero_surface = zero;
  rep.log_transform = log_transform;
  return rep;
}

CrossDistribution cross_distribution(const AnnotationSet& set,
                                     const std::vector<TweetRecord>& tweets,
                                     double threshold_km2) {
  std::unordered_map<std::string_view, std::string_view> source_of;
  source_of.reserve(tweets.size());
  for (const auto& t : tweets) source_of.emplace(t.id, t.source_label);
  CrossDistribution out;
  for (const auto& a : set.annotations) {
    const auto st = classify_specificity(a, set.places, threshold_km2);
    auto it = source_of.find(a.tweet_id());
    const std::string source = it == source_of.end() ? "(unknown)" : std::string(it->second);
    ++out[st][source];
  }
  return out;
}

std::size_t total_count(const CrossDistribution& cross) {
  std::size_t total = 0;
  for (const auto& [st, sources] : cross) {
    for (const auto& [src, c] : sources) total += c;
  }
  return total;
}

nlohmann::json cross_distribution_to_json(const CrossDistribution& cross) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [st, sources] : cross) {
    auto& node = out[std::string(subtype_name(st))];
    node = nlohmann::json::object();
    for (const auto& [src, c] : sources) node[src] = c;
  }
  return out;
}

double usable_fraction(const CrossDistribution& cross) {
  const auto total = total_count(cross);
  if (total == 0) throw Error(ErrorCode::Undefined, "usable fraction of an empty distribution");
  std::size_t usable = 0;
  for (const auto& [st, sources] : cross) {
    if (!is_usable(st)) continue;
    for (const auto& [src, c] : sources) usable += c;
  }
  return static_cast<double>(usable) / static_cast<double>(total);
}

nlohmann::json WhatIfResult::to_json() const {
  return {{"retained_small_annotations", retained_small_annotations},
          {"geotag", geotag},
          {"small_bbox", small_bbox},
          {"small_pbbox", small_pbbox},
          {"retained_places", retained_places},
          {"total_annotations", total_annotations},
          {"usable_fraction",
           usable_fraction ? nlohmann::json(*usable_fraction) : nlohmann::json(nullptr)}};
}

WhatIfResult threshold_whatif(const AnnotationSet& set, double threshold_km2) {
  if (std::isnan(threshold_km2) || threshold_km2 < 0.0) {
    throw Error(ErrorCode::Validation, "threshold must be >= 0");
  }
  std::unordered_map<std::string_view, bool> small_place;
  small_place.reserve(set.places.size());
  for (const auto& [id, p] : set.places) small_place.emplace(id, bbox_surface_km2(p.bbox) < threshold_km2);

  WhatIfResult r;
  std::unordered_set<std::string_view> retained;
  for (const auto& a : set.annotations) {
    ++r.total_annotations;
    if (a.kind() == AnnotationKind::Geotag) {
      ++r.geotag;
      continue;
    }
    auto it = small_place.find(a.place_id());
    if (it == small_place.end()) throw Error(ErrorCode::Integrity, "unknown place " + a.place_id());
    if (!it->second) continue;
    (a.kind() == AnnotationKind::BBox ? r.small_bbox : r.small_pbbox) += 1;
    retained.insert(it->first);
  }
  r.retained_small_annotations = r.geotag + r.small_bbox + r.small_pbbox;
  r.retained_places = retained.size();
  if (r.total_annotations > 0) {
    r.usable_fraction = static_cast<double>(r.retained_small_annotations) /
                        static_cast<double>(r.total_annotations);
  }
  return r;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string scatter_to_csv(const std::vector<PlaceFrequency>& pf) {
  std::string out = "place_id,name,surface_km2,count\n";
  for (const auto& row : pf) {
    out += csv_field(row.place_id) + "," + csv_field(row.name) + "," +
           nlohmann::json(row.surface_km2).dump() + "," + std::to_string(row.count) + "\n";
  }
  return out;
}

nlohmann::json scatter_to_json(const std::vector<PlaceFrequency>& pf) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : pf) {
    out.push_back({{"place_id", row.place_id},
                   {"name", row.name},
                   {"surface_km2", row.surface_km2},
                   {"count", row.count}});
  }
  return out;
}

}  // namespace geoflood
