#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "recon/bm25.hpp"
#include "recon/error.hpp"
#include "recon/rng.hpp"

namespace recon {
namespace {

constexpr std::uint32_t kVocab = 1u << 20;

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

Bm25Index index_of_texts(const std::vector<std::string>& texts) {
  std::vector<std::string> ids;
  std::vector<TokenSeq> docs;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    ids.push_back("d" + std::to_string(i + 1));
    docs.push_back(tokenize(texts[i], kVocab));
  }
  return Bm25Index(ids, docs);
}

// Oracle values from the definition with df(a) = 2, N = 3, avg_len = 7/3:
// idf = ln(1.6); d1 = idf * 2.2 / (1 + 1.2 * (0.25 + 0.75 * 2 / (7/3))).
TEST(Bm25, ThreeDocumentFixture) {
  const auto index = index_of_texts({"a b", "a a c", "b c"});
  const auto q = tokenize("a", kVocab);
  EXPECT_NEAR(index.avg_len(), 7.0 / 3.0, 1e-15);
  EXPECT_EQ(index.doc_freq(q.tokens[0]), 2u);
  EXPECT_NEAR(index.score(q.tokens, "d1"), 0.4991762683, 1e-9);
  EXPECT_NEAR(index.score(q.tokens, "d2"), 0.5981864372, 1e-9);
  EXPECT_EQ(index.score(q.tokens, "d3"), 0.0);
}

TEST(Bm25, IdfNonNegativeForEveryDocFrequency) {
  for (std::size_t n : {1u, 2u, 3u, 10u, 1000u}) {
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t df = 0; df <= n; ++df) {
      const double idf = bm25_idf(df, n);
      EXPECT_GT(idf, 0.0);
      EXPECT_LT(idf, previous);  // rarer terms weigh more
      previous = idf;
    }
  }
}

TEST(Bm25, UnseenTermsScoreZero) {
  const auto index = index_of_texts({"a b", "c d"});
  const auto q = tokenize("zzz", kVocab);
  EXPECT_EQ(index.score(q.tokens, "d1"), 0.0);
  EXPECT_EQ(index.doc_freq(q.tokens[0]), 0u);
}

TEST(Bm25, SearchOrdersAndBreaksTies) {
  const auto index = index_of_texts({"x y", "a b", "a b", "a a b"});
  const auto hits = index.search(tokenize("a", kVocab).tokens, 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].doc_id, "d4");
  EXPECT_EQ(hits[1].doc_id, "d2");  // equal score to d3, smaller id first
  EXPECT_EQ(hits[2].doc_id, "d3");
  EXPECT_EQ(index.search(tokenize("a", kVocab).tokens, 99).size(), 4u);
}

TEST(Bm25, Errors) {
  const auto index = index_of_texts({"a"});
  EXPECT_THROW(index.score(tokenize("a", kVocab).tokens, "missing"), ConfigError);
  EXPECT_THROW(Bm25Index({}, {}), ConfigError);
  EXPECT_THROW(Bm25Index({"x", "x"}, {tokenize("a", kVocab), tokenize("b", kVocab)}), DuplicateIdError);
}

TEST(MineNegatives, SkipsGoldAndStartsAfterIt) {
  const auto index = index_of_texts({"a a a", "a a b", "a b c", "b c d", "c d e"});
  const auto q = tokenize("a", kVocab);
  // Gold is BM25 rank 1, negatives start from rank 2.
  const auto negs = mine_bm25_negatives(index, q.tokens, "d1", 2);
  ASSERT_EQ(negs.size(), 2u);
  EXPECT_EQ(index.doc_ids()[negs[0]], "d2");
  EXPECT_EQ(index.doc_ids()[negs[1]], "d3");
  // Gold ranked lower: the top-count list simply has no gold in it.
  const auto other = mine_bm25_negatives(index, q.tokens, "d5", 2);
  EXPECT_EQ(index.doc_ids()[other[0]], "d1");
  EXPECT_THROW(mine_bm25_negatives(index, q.tokens, "d1", 0), ConfigError);
}

// Property: scores equal the definition-level oracle on random corpora, and
// mined negatives never contain the gold document.
TEST(Bm25Property, MatchesOracleAndExcludesGold) {
  Rng rng(77);
  const std::vector<std::string> alphabet{"a", "b", "c", "d", "e", "f", "g"};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(12);
    std::vector<std::string> texts;
    std::vector<std::vector<std::string>> raw;
    for (std::size_t d = 0; d < n; ++d) {
      std::string text;
      const std::size_t len = 1 + rng.uniform_index(10);
      for (std::size_t i = 0; i < len; ++i) text += alphabet[rng.uniform_index(alphabet.size())] + " ";
      texts.push_back(text);
      raw.push_back(words(text));
    }
    const auto index = index_of_texts(texts);
    std::vector<std::string> query;
    for (std::size_t i = 0; i < 1 + rng.uniform_index(3); ++i) query.push_back(alphabet[rng.uniform_index(alphabet.size())]);
    std::string qtext;
    for (const auto& w : query) qtext += w + " ";
    const auto q = tokenize(qtext, kVocab);
    for (std::size_t d = 0; d < n; ++d) {
      EXPECT_NEAR(index.score(q.tokens, d), oracle::bm25(raw, d, query), 1e-12);
    }
    const std::string gold = "d" + std::to_string(1 + rng.uniform_index(n));
    for (auto neg : mine_bm25_negatives(index, q.tokens, gold, 1 + rng.uniform_index(n))) {
      EXPECT_NE(index.doc_ids()[neg], gold);
    }
  }
}

}  // namespace
}  // namespace recon
