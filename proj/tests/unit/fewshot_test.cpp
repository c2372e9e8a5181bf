#include <set>

#include <gtest/gtest.h>

#include "recon/bm25.hpp"
#include "recon/error.hpp"
#include "recon/fewshot.hpp"
#include "recon/loss.hpp"
#include "recon/synthetic.hpp"
#include "test_util.hpp"

namespace recon {
namespace {

struct Setup {
  SyntheticCorpus syn;
  std::vector<TokenSeq> tokens;
  std::unique_ptr<Bm25Index> bm25;
  FewshotConfig cfg;
};

Setup make_setup() {
  SyntheticSpec spec;
  spec.num_topics = 2;
  spec.docs_per_topic = 15;
  spec.tokens_per_doc = 30;
  spec.vocab_per_topic = 20;
  spec.vocab_size = 2048;
  Setup s;
  s.syn = gen_synthetic(spec);
  s.tokens = tokenize_corpus(s.syn.corpus, spec.vocab_size);
  std::vector<std::string> ids;
  for (const auto& d : s.syn.corpus) ids.push_back(d.id);
  s.bm25 = std::make_unique<Bm25Index>(ids, s.tokens);
  for (std::size_t q = 0; q < 4; ++q) {
    const auto& query = s.syn.queries[q * 5];
    s.cfg.examples.push_back({query.id, query.text, s.syn.qrels.at(query.id).begin()->first});
  }
  s.cfg.negatives_per_query = 5;
  s.cfg.epochs = 3;
  s.cfg.batch_size = 2;
  return s;
}

TEST(Fewshot, NegativesNeverContainGold) {
  auto s = make_setup();
  // Use the gold text itself as the query so the gold is BM25 rank 1.
  for (auto& ex : s.cfg.examples) {
    ex.query_text = s.syn.corpus[s.bm25->index_of(ex.positive_doc_id)].text;
  }
  const auto items = prepare_fewshot(s.syn.corpus, s.tokens, *s.bm25, s.cfg, 2048);
  ASSERT_EQ(items.size(), 4u);
  for (const auto& item : items) {
    EXPECT_EQ(item.negatives.size(), 5u);
    std::set<std::size_t> unique(item.negatives.begin(), item.negatives.end());
    EXPECT_EQ(unique.size(), 5u);
    EXPECT_FALSE(unique.contains(item.positive));
  }
}

TEST(Fewshot, MissingGoldNamesQuery) {
  auto s = make_setup();
  s.cfg.examples[2].positive_doc_id = "no-such-doc";
  try {
    prepare_fewshot(s.syn.corpus, s.tokens, *s.bm25, s.cfg, 2048);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(s.cfg.examples[2].query_id), std::string::npos);
  }
}

TEST(Fewshot, ZeroEpochsLeavesParametersUnchanged) {
  auto s = make_setup();
  s.cfg.epochs = 0;
  const auto params = EncoderParams::initialize(2048, 8, 1);
  EXPECT_EQ(fewshot_finetune(params, s.syn.corpus, s.cfg, *s.bm25), params);
}

TEST(Fewshot, TrainingIsDeterministicAndMovesParameters) {
  auto s = make_setup();
  const auto params = EncoderParams::initialize(2048, 8, 1);
  const auto a = fewshot_finetune(params, s.syn.corpus, s.cfg, *s.bm25);
  EXPECT_EQ(a, fewshot_finetune(params, s.syn.corpus, s.cfg, *s.bm25));
  EXPECT_NE(a, params);
}

TEST(Fewshot, LowersTrainingLoss) {
  auto s = make_setup();
  s.cfg.epochs = 30;
  s.cfg.lr = 0.05;
  const auto params = EncoderParams::initialize(2048, 8, 1, true, 0.5);
  const auto tuned = fewshot_finetune(params, s.syn.corpus, s.cfg, *s.bm25);
  const auto items = prepare_fewshot(s.syn.corpus, s.tokens, *s.bm25, s.cfg, 2048);
  auto total_loss = [&](const EncoderParams& p) {
    double sum = 0.0;
    for (const auto& item : items) {
      const auto q = encode(p, item.query);
      std::vector<double> negs;
      for (auto d : item.negatives) negs.push_back(similarity(q, encode(p, s.tokens[d])));
      sum += info_nce(similarity(q, encode(p, s.tokens[item.positive])), negs, s.cfg.tau);
    }
    return sum;
  };
  EXPECT_LT(total_loss(tuned), total_loss(params));
}

TEST(Fewshot, ConfigValidation) {
  FewshotConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.negatives_per_query = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.lr = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Fewshot, ReadLabeledExamples) {
  test::TempDir dir;
  test::write_file(dir / "ex.jsonl",
                   "{\"query_id\":\"q7\",\"query\":\"hello\",\"positive\":\"d1\"}\n"
                   "\n"
                   "{\"query\":\"world\",\"positive\":\"d2\"}\n");
  const auto ex = read_labeled_examples(dir / "ex.jsonl");
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].query_id, "q7");
  EXPECT_EQ(ex[1].query_id, "line-3");
  EXPECT_EQ(ex[1].positive_doc_id, "d2");
  test::write_file(dir / "bad.jsonl", "{\"query\":\"x\"}\n");
  EXPECT_THROW(read_labeled_examples(dir / "bad.jsonl"), ParseError);
}

}  // namespace
}  // namespace recon
