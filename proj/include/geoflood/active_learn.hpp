#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geoflood/embed.hpp"
#include "geoflood/labels.hpp"

namespace geoflood {

struct LabeledSample {
  std::string tweet_id;
  EmbeddingVector vector;
  ClassLabel label = ClassLabel::NonRelevant;
};

/// What a selection strategy is allowed to see: no label.
struct PoolItem {
  std::string tweet_id;
  EmbeddingVector vector;
};

struct TrainParams {
  std::size_t epochs = 30;
  double learning_rate = 0.05;
  double regularization = 1e-4;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainParams&, const TrainParams&) = default;
};

/// One-vs-rest linear classifier. Classes absent from training never win.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(std::size_t dim, TrainParams params);

  /// Model that always answers `label` (used before two classes are labeled).
  static LinearModel constant(ClassLabel label, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  const TrainParams& params() const noexcept { return params_; }
  bool present(ClassLabel c) const noexcept { return present_[class_index(c)]; }
  std::span<const double> weights(ClassLabel c) const noexcept {
    return {weights_[class_index(c)].data(), weights_[class_index(c)].size()};
  }
  double bias(ClassLabel c) const noexcept { return bias_[class_index(c)]; }

  void set_class(ClassLabel c, std::vector<double> weights, double bias);

  /// Per-class w.x + b; absent classes get -inf.
  std::array<double, kNumClasses> decision_values(std::span<const double> x) const;

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  std::size_t dim_ = 0;
  TrainParams params_{};
  std::array<std::vector<double>, kNumClasses> weights_{};
  std::array<double, kNumClasses> bias_{};
  std::array<bool, kNumClasses> present_{};
};

/// Hinge-loss SGD per class, samples visited in a seeded shuffle of their
/// id order (so the result does not depend on input order). Throws
/// Error(DegenerateData) when fewer than two classes are present.
LinearModel train_ovr(std::span<const LabeledSample> samples, const TrainParams& params);

struct Prediction {
  ClassLabel label = ClassLabel::NonRelevant;
  double confidence = 1.0;  // softmax mass of the winning class
};

/// Argmax of the decision values (ties -> lowest class index).
Prediction predict(const LinearModel& model, std::span<const double> x);

/// Ordering used for tie-breaks: numeric for digit strings.
bool id_less(const std::string& a, const std::string& b) noexcept;

/// k ids drawn uniformly without replacement; independent of input order.
std::vector<std::string> select_random(std::vector<std::string> pool_ids, std::size_t k,
                                       std::uint64_t seed);
/// The k least confident items; ties by ascending id.
std::vector<std::string> select_uncertainty(std::span<const PoolItem> pool,
                                            const LinearModel& model, std::size_t k);
/// Cluster-based sampling: seeded k-means (farthest-first init, fixed
/// iterations) into ceil(sqrt(|pool|)) clusters; draws favour clusters whose
/// known labels are mixed or absent, weighted by cluster size, one draw per
/// cluster per round. `pool` holds labeled and unlabeled items; labeled ones
/// are listed in `known_labels` and never returned.
std::vector<std::string> select_hierarchical(std::span<const PoolItem> pool,
                                             const std::map<std::string, ClassLabel>& known_labels,
                                             std::size_t k, std::uint64_t seed);

/// Cluster assignment used by select_hierarchical (exposed for tests).
std::vector<std::size_t> kmeans_assign(std::span<const PoolItem> pool, std::size_t clusters,
                                       std::uint64_t seed, std::size_t iterations = 10);

enum class Strategy { Random, Uncertainty, Hierarchical };
std::string_view strategy_name(Strategy s) noexcept;

struct PrecisionReport {
  double macro = 0.0;
  std::array<double, kNumClasses> per_class{};
  std::array<bool, kNumClasses> defined{};  // false: class never predicted, counted as 0
};

PrecisionReport evaluate_precision(const LinearModel& model, std::span<const LabeledSample> test);

struct CurveRow {
  std::size_t n_labeled = 0;
  PrecisionReport precision;
};

struct CurveResult {
  std::vector<CurveRow> rows;
  std::vector<std::string> warnings;
};

struct CurveParams {
  Strategy strategy = Strategy::Random;
  std::size_t batch_size = 10;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  TrainParams train{};
};

/// Select -> reveal -> retrain -> evaluate, one row per iteration. Test
/// labels are only read by the evaluator.
CurveResult run_curve(std::span<const LabeledSample> train_pool,
                      std::span<const LabeledSample> test_set, const CurveParams& params);

/// Seeded shuffle, then the last `test_count` samples form the test set.
std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> split_train_test(
    std::vector<LabeledSample> samples, std::size_t test_count, std::uint64_t seed);

/// `tweet_id,label` with optional header.
std::vector<std::pair<std::string, ClassLabel>> load_labels_csv(const std::filesystem::path& path);
void save_labels_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, ClassLabel>>& labels);

/// `n_labeled,macro_precision,p_nonrel,p_pos,p_neg`
std::string curve_to_csv(const CurveResult& curve);

}  // namespace geoflood
