#include "recon/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <vector>

#include "recon/error.hpp"

namespace recon {

namespace {

const std::map<std::string, int>& judged_for(const Qrels& qrels, const std::string& qid) {
  auto it = qrels.find(qid);
  if (it == qrels.end()) throw ConfigError("query \"" + qid + "\" has no relevance judgments");
  return it->second;
}

MetricResult average(std::map<std::string, double> per_query) {
  MetricResult result{std::move(per_query), 0.0};
  if (!result.per_query.empty()) {
    double sum = 0.0;
    for (const auto& [qid, v] : result.per_query) sum += v;
    result.mean = sum / static_cast<double>(result.per_query.size());
  }
  return result;
}

double gain_value(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }

}  // namespace

MetricResult ndcg_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k) {
  if (k == 0) throw ConfigError("ndcg: k must be positive");
  std::map<std::string, double> per_query;
  for (const auto& [qid, ranked] : run) {
    const auto& judged = judged_for(qrels, qid);
    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
      auto it = judged.find(ranked[r].doc_id);
      if (it != judged.end() && it->second > 0) {
        dcg += gain_value(it->second) / std::log2(static_cast<double>(r) + 2.0);
      }
    }
    std::vector<int> grades;
    for (const auto& [doc, g] : judged) {
      if (g > 0) grades.push_back(g);
    }
    std::sort(grades.begin(), grades.end(), std::greater<>());
    double ideal = 0.0;
    for (std::size_t r = 0; r < std::min(k, grades.size()); ++r) {
      ideal += gain_value(grades[r]) / std::log2(static_cast<double>(r) + 2.0);
    }
    per_query[qid] = ideal > 0.0 ? dcg / ideal : 0.0;
  }
  return average(std::move(per_query));
}

MetricResult recall_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k) {
  if (k == 0) throw ConfigError("recall: k must be positive");
  std::map<std::string, double> per_query;
  for (const auto& [qid, ranked] : run) {
    const auto& judged = judged_for(qrels, qid);
    std::size_t relevant = 0;
    for (const auto& [doc, g] : judged) {
      if (g > 0) ++relevant;
    }
    std::size_t found = 0;
    for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
      auto it = judged.find(ranked[r].doc_id);
      if (it != judged.end() && it->second > 0) ++found;
    }
    per_query[qid] =
        relevant == 0 ? 0.0 : static_cast<double>(found) / static_cast<double>(relevant);
  }
  return average(std::move(per_query));
}

std::string MetricSpec::name() const {
  return (kind == MetricKind::ndcg ? "ndcg@" : "recall@") + std::to_string(k);
}

MetricSpec parse_metric(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) throw ConfigError("metric must look like ndcg@10 or recall@20");
  MetricSpec spec;
  const auto name = text.substr(0, at);
  if (name == "ndcg") {
    spec.kind = MetricKind::ndcg;
  } else if (name == "recall") {
    spec.kind = MetricKind::recall;
  } else {
    throw ConfigError("unknown metric \"" + std::string(name) + "\"");
  }
  const auto digits = text.substr(at + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), spec.k);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || spec.k == 0) {
    throw ConfigError("bad cutoff in metric \"" + std::string(text) + "\"");
  }
  return spec;
}

MetricResult evaluate_metric(const RankedRun& run, const Qrels& qrels, const MetricSpec& spec) {
  return spec.kind == MetricKind::ndcg ? ndcg_at_k(run, qrels, spec.k)
                                       : recall_at_k(run, qrels, spec.k);
}

RankedRun restrict_to_judged(const RankedRun& run, const Qrels& qrels) {
  RankedRun out;
  for (const auto& [qid, ranked] : run) {
    auto it = qrels.find(qid);
    if (it == qrels.end()) continue;
    if (std::any_of(it->second.begin(), it->second.end(), [](const auto& kv) { return kv.second > 0; })) {
      out.emplace(qid, ranked);
    }
  }
  return out;
}

}  // namespace recon
