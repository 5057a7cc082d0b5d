#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace geoflood {

inline constexpr std::size_t kDefaultEmbeddingDim = 500;

/// Fixed-length dense vector. Unit L2 norm for non-empty text, zero otherwise.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double norm() const noexcept;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) noexcept;

struct NgramHashing {
  std::size_t dim = kDefaultEmbeddingDim;
  std::size_t n_min = 1;
  std::size_t n_max = 3;
  std::uint64_t seed = 0;
};

/// Signed feature hashing of case-folded character n-grams, L2-normalized.
/// This is a deterministic stand-in for a learned character-level encoder;
/// vectors share the encoder's default width so the two are interchangeable.
EmbeddingVector embed_char_ngram(std::string_view text, const NgramHashing& params = {});

/// tweet_id -> vector lookups from a `tweet_id<TAB>f1,f2,...,fd` file.
class PrecomputedEmbeddings {
 public:
  PrecomputedEmbeddings() = default;

  /// Throws Error(Format) on malformed rows or inconsistent dimensions.
  static PrecomputedEmbeddings load(const std::filesystem::path& path);

  void insert(std::string tweet_id, EmbeddingVector v);
  std::optional<EmbeddingVector> lookup(std::string_view tweet_id) const;
  std::size_t size() const noexcept { return vectors_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  /// Writes rows in ascending id order with round-trip exact numbers.
  void save(const std::filesystem::path& path) const;

 private:
  std::unordered_map<std::string, EmbeddingVector> vectors_;
  std::size_t dim_ = 0;
};

}  // namespace geoflood
