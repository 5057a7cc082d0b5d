#include "geoflood/embed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "geoflood/error.hpp"
#include "geoflood/text.hpp"

namespace geoflood {

namespace {

std::uint64_t finalize(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

std::uint64_t hash_ngram(std::u32string_view gram, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ finalize(seed + 0x9E3779B97F4A7C15ULL);
  for (char32_t c : gram) {
    for (int shift = 0; shift < 32; shift += 8) {
      h ^= (static_cast<std::uint64_t>(c) >> shift) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  // Length marker keeps "a" + "b" distinct from "ab" when bytes line up.
  h ^= gram.size();
  h *= 0x100000001b3ULL;
  return finalize(h);
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::Validation, "embedding entries must be finite");
  }
}

double EmbeddingVector::norm() const noexcept { return std::sqrt(dot(values_, values_)); }

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) noexcept {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a.values(), b.values()) / (na * nb);
}

EmbeddingVector embed_char_ngram(std::string_view text, const NgramHashing& params) {
  if (params.dim == 0) throw Error(ErrorCode::Validation, "embedding dimension must be >= 1");
  if (params.n_min == 0 || params.n_min > params.n_max) {
    throw Error(ErrorCode::Validation, "n-gram range must satisfy 1 <= n_min <= n_max");
  }
  std::vector<double> acc(params.dim, 0.0);
  const auto chars = text::fold_case(text::decode_utf8(text));
  if (chars.empty()) return EmbeddingVector(std::move(acc));

  const std::u32string_view view(chars);
  for (std::size_t n = params.n_min; n <= params.n_max; ++n) {
    if (n > view.size()) break;
    for (std::size_t i = 0; i + n <= view.size(); ++i) {
      const auto h = hash_ngram(view.substr(i, n), params.seed);
      const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
      acc[h % params.dim] += sign;
    }
  }
  double sq = 0.0;
  for (double v : acc) sq += v * v;
  if (sq == 0.0) {
    // Signed collisions cancelled everything: fall back to a one-hot code of the whole text.
    acc[hash_ngram(view, params.seed ^ 0xA5A5A5A5ULL) % params.dim] = 1.0;
    return EmbeddingVector(std::move(acc));
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : acc) v *= inv;
  return EmbeddingVector(std::move(acc));
}

void PrecomputedEmbeddings::insert(std::string tweet_id, EmbeddingVector v) {
  if (v.dim() == 0) throw Error(ErrorCode::Format, "embedding for " + tweet_id + " is empty");
  if (dim_ == 0) {
    dim_ = v.dim();
  } else if (v.dim() != dim_) {
    throw Error(ErrorCode::Format, "embedding for " + tweet_id + " has dimension " +
                                       std::to_string(v.dim()) + ", expected " +
                                       std::to_string(dim_));
  }
  vectors_.insert_or_assign(std::move(tweet_id), std::move(v));
}

std::optional<EmbeddingVector> PrecomputedEmbeddings::lookup(std::string_view tweet_id) const {
  auto it = vectors_.find(std::string(tweet_id));
  if (it == vectors_.end()) return std::nullopt;
  return it->second;
}

PrecomputedEmbeddings PrecomputedEmbeddings::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  PrecomputedEmbeddings out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::Format, where + ": expected tweet_id<TAB>values");
    }
    std::string id = line.substr(0, tab);
    if (out.vectors_.contains(id)) throw Error(ErrorCode::Format, where + ": duplicate id " + id);
    std::vector<double> values;
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) throw Error(ErrorCode::Format, where + ": bad number");
      values.push_back(v);
      p = next;
      if (p < end) {
        if (*p != ',') throw Error(ErrorCode::Format, where + ": expected ','");
        ++p;
        if (p == end) throw Error(ErrorCode::Format, where + ": trailing ','");
      }
    }
    try {
      out.insert(std::move(id), EmbeddingVector(std::move(values)));
    } catch (const Error& e) {
      throw Error(ErrorCode::Format, where + ": " + e.what());
    }
  }
  return out;
}

void PrecomputedEmbeddings::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  std::vector<const std::string*> ids;
  ids.reserve(vectors_.size());
  for (const auto& [id, v] : vectors_) ids.push_back(&id);
  std::sort(ids.begin(), ids.end(), [](const std::string* a, const std::string* b) {
    return a->size() != b->size() ? a->size() < b->size() : *a < *b;
  });
  std::string row;
  char buf[32];
  for (const auto* id : ids) {
    row = *id;
    row += '\t';
    const auto& v = vectors_.at(*id);
    for (std::size_t i = 0; i < v.dim(); ++i) {
      if (i > 0) row += ',';
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v[i]);
      row.append(buf, p);
    }
    row += '\n';
    out << row;
  }
}

}  // namespace geoflood
