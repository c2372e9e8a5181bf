#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "recon/error.hpp"
#include "recon/metrics.hpp"
#include "recon/rng.hpp"

namespace recon {
namespace {

RankedRun ranked(const std::string& qid, std::vector<std::string> order) {
  std::vector<ScoredDoc> docs;
  double score = static_cast<double>(order.size());
  for (auto& id : order) docs.push_back({std::move(id), score--});
  return {{qid, docs}};
}

TEST(Ndcg, ClosedForms) {
  const Qrels single{{"q", {{"c", 1}}}};
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked("q", {"a", "b", "c"}), single, 10).mean, 0.5);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked("q", {"c", "a", "b"}), single, 10).mean, 1.0);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked("q", {"a", "b", "c"}), single, 2).mean, 0.0);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked("q", {"a", "b"}), single, 10).mean, 0.0);
}

// Oracle: (1/log2(2) + 3/log2(3)) / (3/log2(2) + 1/log2(3)), brute force over the two orders.
TEST(Ndcg, GradedFixture) {
  const Qrels qrels{{"q", {{"A", 2}, {"B", 1}}}};
  EXPECT_NEAR(ndcg_at_k(ranked("q", {"B", "A"}), qrels, 10).mean, 0.7967075809905066, 1e-12);
}

TEST(Ndcg, ZeroGainJudgmentsIgnored) {
  const Qrels qrels{{"q", {{"a", 0}, {"b", 1}}}};
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked("q", {"a", "b"}), qrels, 10).mean, 1.0 / std::log2(3.0));
}

TEST(Recall, ClosedForms) {
  const Qrels qrels{{"q", {{"a", 1}, {"z", 1}}}};
  EXPECT_DOUBLE_EQ(recall_at_k(ranked("q", {"a", "b", "c"}), qrels, 5).mean, 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(ranked("q", {"b", "c", "a"}), qrels, 2).mean, 0.0);
  EXPECT_DOUBLE_EQ(recall_at_k(ranked("q", {"z", "a"}), qrels, 2).mean, 1.0);
}

TEST(Metrics, MeanOverQueries) {
  RankedRun run = ranked("q1", {"a", "b"});
  run.merge(ranked("q2", {"b", "a"}));
  const Qrels qrels{{"q1", {{"a", 1}}}, {"q2", {{"a", 1}}}};
  const auto r = recall_at_k(run, qrels, 1);
  EXPECT_DOUBLE_EQ(r.per_query.at("q1"), 1.0);
  EXPECT_DOUBLE_EQ(r.per_query.at("q2"), 0.0);
  EXPECT_DOUBLE_EQ(r.mean, 0.5);
}

TEST(Metrics, Errors) {
  const Qrels qrels{{"q", {{"a", 1}}}};
  EXPECT_THROW(ndcg_at_k(ranked("other", {"a"}), qrels, 10), ConfigError);
  EXPECT_THROW(recall_at_k(ranked("q", {"a"}), qrels, 0), ConfigError);
}

TEST(ParseMetric, Forms) {
  EXPECT_EQ(parse_metric("ndcg@10").kind, MetricKind::ndcg);
  EXPECT_EQ(parse_metric("recall@100").k, 100u);
  EXPECT_EQ(parse_metric("recall@20").name(), "recall@20");
  for (const char* bad : {"ndcg", "map@10", "ndcg@0", "ndcg@x", "recall@5a"}) {
    EXPECT_THROW(parse_metric(bad), ConfigError) << bad;
  }
}

TEST(RestrictToJudged, DropsQueriesWithoutPositives) {
  RankedRun run = ranked("q1", {"a"});
  run.merge(ranked("q2", {"a"}));
  run.merge(ranked("q3", {"a"}));
  const Qrels qrels{{"q1", {{"a", 1}}}, {"q2", {{"a", 0}}}};
  const auto kept = restrict_to_judged(run, qrels);
  EXPECT_EQ(kept.size(), 1u);
  EXPECT_TRUE(kept.contains("q1"));
}

// Property: library metrics equal the brute-force oracle on random runs with
// graded judgments and tied scores.
TEST(MetricsProperty, MatchBruteForceOracle) {
  Rng rng(2024);
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t num_docs = 1 + rng.uniform_index(20);
    const std::size_t num_queries = 1 + rng.uniform_index(5);
    RankedRun run;
    Qrels qrels;
    std::map<std::string, std::map<std::string, double>> scores;
    for (std::size_t q = 0; q < num_queries; ++q) {
      const std::string qid = "q" + std::to_string(q);
      auto& judged = qrels[qid];
      judged["d0"] = 1 + static_cast<int>(rng.uniform_index(3));  // at least one positive
      std::vector<ScoredDoc> docs;
      for (std::size_t d = 0; d < num_docs; ++d) {
        const std::string id = "d" + std::to_string(d);
        const double s = std::round(rng.uniform(0, 4));  // coarse scores force ties
        scores[qid][id] = s;
        docs.push_back({id, s});
        if (d > 0 && rng.uniform01() < 0.4) judged[id] = static_cast<int>(rng.uniform_index(4));
      }
      if (rng.uniform01() < 0.3) judged["unretrieved"] = 2;
      std::sort(docs.begin(), docs.end(), ranks_before);
      run[qid] = docs;
    }
    for (std::size_t k : {5u, 10u, 20u, 100u}) {
      const auto n = ndcg_at_k(run, qrels, k);
      const auto r = recall_at_k(run, qrels, k);
      for (const auto& [qid, per] : scores) {
        EXPECT_NEAR(n.per_query.at(qid), oracle::ndcg(per, qrels.at(qid), k), 1e-9);
        EXPECT_NEAR(r.per_query.at(qid), oracle::recall(per, qrels.at(qid), k), 1e-9);
      }
    }
  }
}

}  // namespace
}  // namespace recon
