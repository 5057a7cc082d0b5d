#include "geoflood/active_learn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "geoflood/error.hpp"
#include "geoflood/text.hpp"

namespace geoflood {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream};
  return std::mt19937_64(seq);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t checked_dim(std::span<const LabeledSample> samples) {
  const auto dim = samples.front().vector.dim();
  for (const auto& s : samples) {
    if (s.vector.dim() != dim) {
      throw Error(ErrorCode::Format, "sample " + s.tweet_id + " has dimension " +
                                         std::to_string(s.vector.dim()) + ", expected " +
                                         std::to_string(dim));
    }
  }
  return dim;
}

}  // namespace

LinearModel::LinearModel(std::size_t dim, TrainParams params) : dim_(dim), params_(params) {
  for (auto& w : weights_) w.assign(dim, 0.0);
}

LinearModel LinearModel::constant(ClassLabel label, std::size_t dim) {
  LinearModel m(dim, TrainParams{});
  m.present_[class_index(label)] = true;
  return m;
}

void LinearModel::set_class(ClassLabel c, std::vector<double> weights, double bias) {
  if (weights.size() != dim_) throw Error(ErrorCode::Validation, "weight dimension mismatch");
  weights_[class_index(c)] = std::move(weights);
  bias_[class_index(c)] = bias;
  present_[class_index(c)] = true;
}

std::array<double, kNumClasses> LinearModel::decision_values(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw Error(ErrorCode::Validation, "input dimension " + std::to_string(x.size()) +
                                           " does not match model dimension " +
                                           std::to_string(dim_));
  }
  std::array<double, kNumClasses> out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out[c] = present_[c] ? dot(weights_[c], x) + bias_[c]
                         : -std::numeric_limits<double>::infinity();
  }
  return out;
}

LinearModel train_ovr(std::span<const LabeledSample> samples, const TrainParams& params) {
  if (samples.empty()) throw Error(ErrorCode::DegenerateData, "no training samples");
  const auto dim = checked_dim(samples);

  std::vector<const LabeledSample*> ordered;
  ordered.reserve(samples.size());
  for (const auto& s : samples) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return id_less(a->tweet_id, b->tweet_id);
  });

  std::array<bool, kNumClasses> present{};
  for (const auto* s : ordered) present[class_index(s->label)] = true;
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw Error(ErrorCode::DegenerateData, "training needs at least two classes");
  }

  std::array<std::vector<double>, kNumClasses> w;
  std::array<double, kNumClasses> b{};
  for (auto& wc : w) wc.assign(dim, 0.0);

  auto rng = make_rng(params.seed, 0x7261696e);
  std::vector<std::size_t> order(ordered.size());
  std::iota(order.begin(), order.end(), 0);
  const double eta = params.learning_rate;
  const double shrink = 1.0 - eta * params.regularization;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto idx : order) {
      const auto& s = *ordered[idx];
      const auto x = s.vector.values();
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (!present[c]) continue;
        const double y = class_index(s.label) == c ? 1.0 : -1.0;
        const double margin = y * (dot(w[c], x) + b[c]);
        for (auto& v : w[c]) v *= shrink;
        if (margin < 1.0) {
          for (std::size_t i = 0; i < dim; ++i) w[c][i] += eta * y * x[i];
          b[c] += eta * y;
        }
      }
    }
  }

  LinearModel model(dim, params);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (present[c]) model.set_class(kAllClasses[c], std::move(w[c]), b[c]);
  }
  return model;
}

Prediction predict(const LinearModel& model, std::span<const double> x) {
  const auto scores = model.decision_values(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  double denom = 0.0;
  for (double s : scores) {
    if (std::isfinite(s)) denom += std::exp(s - scores[best]);
  }
  return Prediction{kAllClasses[best], 1.0 / denom};
}

bool id_less(const std::string& a, const std::string& b) noexcept {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::vector<std::string> select_random(std::vector<std::string> pool_ids, std::size_t k,
                                       std::uint64_t seed) {
  if (k > pool_ids.size()) {
    throw Error(ErrorCode::Request, "cannot select " + std::to_string(k) + " of " +
                                        std::to_string(pool_ids.size()) + " pool items");
  }
  std::sort(pool_ids.begin(), pool_ids.end(), id_less);
  auto rng = make_rng(seed, 0x72616e64);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool_ids.size() - 1);
    std::swap(pool_ids[i], pool_ids[pick(rng)]);
  }
  pool_ids.resize(k);
  return pool_ids;
}

std::vector<std::string> select_uncertainty(std::span<const PoolItem> pool,
                                            const LinearModel& model, std::size_t k) {
  if (k > pool.size()) {
    throw Error(ErrorCode::Request, "cannot select " + std::to_string(k) + " of " +
                                        std::to_string(pool.size()) + " pool items");
  }
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(pool.size());
  for (const auto& item : pool) {
    scored.emplace_back(predict(model, item.vector.values()).confidence, &item.tweet_id);
  }
  auto less = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return id_less(*a.second, *b.second);
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    less);
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(*scored[i].second);
  return out;
}

std::vector<std::size_t> kmeans_assign(std::span<const PoolItem> pool, std::size_t clusters,
                                       std::uint64_t seed, std::size_t iterations) {
  const auto n = pool.size();
  if (n == 0) return {};
  clusters = std::clamp<std::size_t>(clusters, 1, n);
  const auto dim = pool.front().vector.dim();

  auto rng = make_rng(seed, 0x6b6d6561);
  std::vector<std::vector<double>> centers;
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  const auto v0 = pool[first(rng)].vector.values();
  centers.emplace_back(v0.begin(), v0.end());
  // Farthest-first traversal for the remaining seeds.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centers.size() < clusters) {
    std::size_t far = 0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(pool[i].vector.values(), centers.back()));
      if (nearest[i] > nearest[far]) far = i;
    }
    const auto vf = pool[far].vector.values();
    centers.emplace_back(vf.begin(), vf.end());
  }

  std::vector<std::size_t> assign(n, 0);
  for (std::size_t it = 0; it <= iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = squared_distance(pool[i].vector.values(), centers[c]);
        if (d < best) {
          best = d;
          assign[i] = c;
        }
      }
    }
    if (it == iterations) break;
    std::vector<std::vector<double>> sums(centers.size(), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = pool[i].vector.values();
      for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += v[d];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;  // keep the previous center
      for (std::size_t d = 0; d < dim; ++d) {
        centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
  }
  return assign;
}

std::vector<std::string> select_hierarchical(std::span<const PoolItem> pool,
                                             const std::map<std::string, ClassLabel>& known_labels,
                                             std::size_t k, std::uint64_t seed) {
  std::vector<PoolItem> sorted(pool.begin(), pool.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const PoolItem& a, const PoolItem& b) { return id_less(a.tweet_id, b.tweet_id); });

  std::size_t unlabeled = 0;
  for (const auto& item : sorted) unlabeled += known_labels.contains(item.tweet_id) ? 0 : 1;
  if (k > unlabeled) {
    throw Error(ErrorCode::Request, "cannot select " + std::to_string(k) + " of " +
                                        std::to_string(unlabeled) + " unlabeled pool items");
  }
  if (k == 0) return {};

  const auto clusters =
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(sorted.size()))));
  const auto assign = kmeans_assign(sorted, clusters, seed);
  const auto m = clusters == 0 ? 0 : *std::max_element(assign.begin(), assign.end()) + 1;

  std::vector<std::vector<std::size_t>> remaining(m);  // unlabeled members, id order
  std::vector<std::size_t> size(m, 0);
  std::vector<std::set<ClassLabel>> seen(m);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto c = assign[i];
    ++size[c];
    if (auto it = known_labels.find(sorted[i].tweet_id); it != known_labels.end()) {
      seen[c].insert(it->second);
    } else {
      remaining[c].push_back(i);
    }
  }
  std::vector<bool> preferred(m);
  for (std::size_t c = 0; c < m; ++c) preferred[c] = seen[c].size() != 1;

  auto rng = make_rng(seed, 0x68696572);
  std::vector<bool> used_in_round(m, false);
  std::vector<std::string> out;
  out.reserve(k);
  while (out.size() < k) {
    auto eligible = [&](bool need_preferred, bool respect_round) {
      std::vector<std::size_t> cs;
      for (std::size_t c = 0; c < m; ++c) {
        if (remaining[c].empty()) continue;
        if (need_preferred && !preferred[c]) continue;
        if (respect_round && used_in_round[c]) continue;
        cs.push_back(c);
      }
      return cs;
    };
    bool any_preferred = false;
    for (std::size_t c = 0; c < m; ++c) any_preferred |= preferred[c] && !remaining[c].empty();
    auto cands = eligible(any_preferred, true);
    if (cands.empty()) {
      std::fill(used_in_round.begin(), used_in_round.end(), false);
      cands = eligible(any_preferred, true);
    }
    std::vector<double> weights;
    for (auto c : cands) weights.push_back(static_cast<double>(size[c]));
    std::discrete_distribution<std::size_t> pick_cluster(weights.begin(), weights.end());
    const auto c = cands[pick_cluster(rng)];
    used_in_round[c] = true;
    std::uniform_int_distribution<std::size_t> pick_member(0, remaining[c].size() - 1);
    const auto pos = pick_member(rng);
    out.push_back(sorted[remaining[c][pos]].tweet_id);
    remaining[c].erase(remaining[c].begin() + static_cast<std::ptrdiff_t>(pos));
  }
  return out;
}

std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Uncertainty: return "uncertainty";
    case Strategy::Hierarchical: return "hierarchical";
  }
  return "random";
}

PrecisionReport evaluate_precision(const LinearModel& model, std::span<const LabeledSample> test) {
  std::array<std::size_t, kNumClasses> predicted{}, correct{};
  for (const auto& s : test) {
    const auto p = predict(model, s.vector.values());
    ++predicted[class_index(p.label)];
    if (p.label == s.label) ++correct[class_index(p.label)];
  }
  PrecisionReport r;
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    r.defined[c] = predicted[c] > 0;
    r.per_class[c] = r.defined[c] ? static_cast<double>(correct[c]) /
                                        static_cast<double>(predicted[c])
                                  : 0.0;
    sum += r.per_class[c];
  }
  r.macro = sum / static_cast<double>(kNumClasses);
  return r;
}

CurveResult run_curve(std::span<const LabeledSample> train_pool,
                      std::span<const LabeledSample> test_set, const CurveParams& params) {
  if (train_pool.empty()) throw Error(ErrorCode::Request, "empty training pool");
  if (test_set.empty()) throw Error(ErrorCode::Request, "empty test set");
  if (params.batch_size == 0) throw Error(ErrorCode::Request, "batch size must be >= 1");
  const auto dim = checked_dim(train_pool);
  if (checked_dim(test_set) != dim) {
    throw Error(ErrorCode::Format, "test set dimension differs from the training pool");
  }

  CurveResult result;
  std::size_t budget = params.budget;
  if (budget > train_pool.size()) {
    result.warnings.push_back("budget " + std::to_string(budget) + " exceeds pool size " +
                              std::to_string(train_pool.size()) + "; clipped");
    budget = train_pool.size();
  }

  // Strategies only ever see `items`; labels stay behind `reveal`.
  std::vector<PoolItem> items;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < train_pool.size(); ++i) {
    items.push_back({train_pool[i].tweet_id, train_pool[i].vector});
    if (!index_of.emplace(train_pool[i].tweet_id, i).second) {
      throw Error(ErrorCode::Format, "duplicate tweet id " + train_pool[i].tweet_id + " in pool");
    }
  }
  auto reveal = [&](const std::string& id) { return train_pool[index_of.at(id)].label; };

  std::map<std::string, ClassLabel> known;
  std::vector<LabeledSample> labeled;
  std::optional<LinearModel> model;
  std::size_t iteration = 0;
  std::array<bool, kNumClasses> warned{};

  while (labeled.size() < budget) {
    const auto want = std::min(params.batch_size, budget - labeled.size());
    const auto iter_seed = params.seed + 0x9E3779B97F4A7C15ULL * (iteration + 1);
    std::vector<PoolItem> unlabeled;
    for (const auto& item : items) {
      if (!known.contains(item.tweet_id)) unlabeled.push_back(item);
    }
    std::vector<std::string> batch;
    const bool cold = !model.has_value();
    switch (params.strategy) {
      case Strategy::Random:
        batch = select_random([&] {
          std::vector<std::string> ids;
          for (const auto& u : unlabeled) ids.push_back(u.tweet_id);
          return ids;
        }(), want, iter_seed);
        break;
      case Strategy::Uncertainty:
        if (cold) {
          std::vector<std::string> ids;
          for (const auto& u : unlabeled) ids.push_back(u.tweet_id);
          batch = select_random(std::move(ids), want, iter_seed);
        } else {
          batch = select_uncertainty(unlabeled, *model, want);
        }
        break;
      case Strategy::Hierarchical:
        batch = select_hierarchical(items, known, want, iter_seed);
        break;
    }
    for (const auto& id : batch) {
      const auto label = reveal(id);
      known.emplace(id, label);
      labeled.push_back(train_pool[index_of.at(id)]);
    }

    std::set<ClassLabel> classes;
    for (const auto& s : labeled) classes.insert(s.label);
    if (classes.size() >= 2) {
      model = train_ovr(labeled, params.train);
    } else {
      model = LinearModel::constant(*classes.begin(), dim);
    }

    CurveRow row;
    row.n_labeled = labeled.size();
    row.precision = evaluate_precision(*model, test_set);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (!row.precision.defined[c] && !warned[c]) {
        warned[c] = true;
        result.warnings.push_back("class " + std::string(label_name(kAllClasses[c])) +
                                  " not predicted at n_labeled=" + std::to_string(row.n_labeled) +
                                  "; precision counted as 0");
      }
    }
    result.rows.push_back(row);
    ++iteration;
  }
  return result;
}

std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> split_train_test(
    std::vector<LabeledSample> samples, std::size_t test_count, std::uint64_t seed) {
  if (test_count > samples.size()) {
    throw Error(ErrorCode::Request, "test split larger than the sample set");
  }
  std::stable_sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    return id_less(a.tweet_id, b.tweet_id);
  });
  auto rng = make_rng(seed, 0x73706c74);
  std::shuffle(samples.begin(), samples.end(), rng);
  std::vector<LabeledSample> test(samples.end() - static_cast<std::ptrdiff_t>(test_count),
                                  samples.end());
  samples.resize(samples.size() - test_count);
  return {std::move(samples), std::move(test)};
}

std::vector<std::pair<std::string, ClassLabel>> load_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<std::pair<std::string, ClassLabel>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto parts = text::split(line, ',');
    if (line_no == 1 && !parts.empty() && parts[0] == "tweet_id") continue;
    if (parts.size() != 2) {
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(line_no) +
                                         ": expected tweet_id,label");
    }
    const auto label = parse_label(parts[1]);
    if (!label) {
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(line_no) +
                                         ": unknown label '" + parts[1] + "'");
    }
    out.emplace_back(parts[0], *label);
  }
  return out;
}

void save_labels_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, ClassLabel>>& labels) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "tweet_id,label\n";
  for (const auto& [id, label] : labels) out << id << ',' << label_name(label) << '\n';
}

std::string curve_to_csv(const CurveResult& curve) {
  auto num = [](double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
  };
  std::string out = "n_labeled,macro_precision,p_nonrel,p_pos,p_neg\n";
  for (const auto& row : curve.rows) {
    out += std::to_string(row.n_labeled) + "," + num(row.precision.macro);
    for (double p : row.precision.per_class) out += "," + num(p);
    out += "\n";
  }
  return out;
}

}  // namespace geoflood
