#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

#include "recon/run.hpp"

namespace recon {

struct MetricResult {
  std::map<std::string, double> per_query;
  double mean = 0.0;
};

/// Gain 2^g - 1, discount log2(rank + 1), normalized by the ideal DCG at k.
/// Every run query must appear in qrels.
MetricResult ndcg_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k);

/// Fraction of positive-gain documents found in the top k.
MetricResult recall_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k);

enum class MetricKind { ndcg, recall };

struct MetricSpec {
  MetricKind kind = MetricKind::ndcg;
  std::size_t k = 10;

  std::string name() const;
};

/// Parses "ndcg@10" or "recall@20".
MetricSpec parse_metric(std::string_view text);

MetricResult evaluate_metric(const RankedRun& run, const Qrels& qrels, const MetricSpec& spec);

/// Keeps only queries that have at least one positive-gain judgment.
RankedRun restrict_to_judged(const RankedRun& run, const Qrels& qrels);

}  // namespace recon
