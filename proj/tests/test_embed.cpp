#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "geoflood/embed.hpp"
#include "test_support.hpp"

using namespace geoflood;
using testing::error_code_of;

TEST_CASE("n-gram embedding basics") {
  const auto empty = embed_char_ngram("");
  CHECK(empty.dim() == kDefaultEmbeddingDim);
  CHECK(empty.norm() == 0.0);

  for (const char* t : {"a", "flood", "Water rising on Main St #harvey", "ütf-8 ✓"}) {
    CHECK(embed_char_ngram(t).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(embed_char_ngram("Flood") == embed_char_ngram("flood"));
  CHECK(embed_char_ngram("flood") == embed_char_ngram("flood"));
  CHECK_FALSE(embed_char_ngram("ab") == embed_char_ngram("ba"));

  const auto flood = embed_char_ngram("flood");
  CHECK(cosine_similarity(flood, embed_char_ngram("flooding")) >
        cosine_similarity(flood, embed_char_ngram("qwzjx")));

  NgramHashing small{64, 2, 4, 3};
  CHECK(embed_char_ngram("flood", small).dim() == 64);
  CHECK_FALSE(embed_char_ngram("flood", small) == embed_char_ngram("flood", NgramHashing{64, 2, 4, 4}));
}

TEST_CASE("cosine similarity") {
  EmbeddingVector a({1.0, 0.0}), b({0.0, 2.0}), c({3.0, 0.0}), z({0.0, 0.0});
  CHECK(cosine_similarity(a, b) == 0.0);
  CHECK(cosine_similarity(a, c) == doctest::Approx(1.0));
  CHECK(cosine_similarity(a, z) == 0.0);
  const std::vector<double> x{1.0, 2.0, 3.0}, y{-1.0, 0.5, 2.0};
  CHECK(dot(x, y) == doctest::Approx(6.0));
}

TEST_CASE("precomputed embeddings round trip bit-exactly") {
  testing::TempDir dir("emb");
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  PrecomputedEmbeddings e;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(12);
    for (auto& x : v) x = g(rng) * std::pow(10.0, i % 7 - 3);
    e.insert(std::to_string(1000 + i), EmbeddingVector(v));
  }
  e.save(dir.path() / "e.tsv");
  const auto back = PrecomputedEmbeddings::load(dir.path() / "e.tsv");
  REQUIRE(back.size() == 100);
  CHECK(back.dim() == 12);
  for (int i = 0; i < 100; ++i) {
    const auto id = std::to_string(1000 + i);
    CHECK(back.lookup(id) == e.lookup(id));
  }
  CHECK_FALSE(back.lookup("1").has_value());
}

TEST_CASE("precomputed embeddings reject bad files") {
  testing::TempDir dir("emb_bad");
  std::ofstream(dir.path() / "empty.tsv");
  CHECK(PrecomputedEmbeddings::load(dir.path() / "empty.tsv").size() == 0);

  std::ofstream(dir.path() / "mismatch.tsv") << "1\t0.1,0.2\n2\t0.1,0.2,0.3\n";
  CHECK(error_code_of([&] { PrecomputedEmbeddings::load(dir.path() / "mismatch.tsv"); }) ==
        ErrorCode::Format);
  std::ofstream(dir.path() / "junk.tsv") << "1\t0.1,abc\n";
  CHECK(error_code_of([&] { PrecomputedEmbeddings::load(dir.path() / "junk.tsv"); }) ==
        ErrorCode::Format);
  std::ofstream(dir.path() / "notab.tsv") << "1 0.1,0.2\n";
  CHECK(error_code_of([&] { PrecomputedEmbeddings::load(dir.path() / "notab.tsv"); }) ==
        ErrorCode::Format);

  PrecomputedEmbeddings e;
  e.insert("1", EmbeddingVector({1.0, 2.0}));
  CHECK(error_code_of([&] { e.insert("2", EmbeddingVector({1.0})); }) == ErrorCode::Format);
}
