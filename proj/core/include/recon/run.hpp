#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace recon {

/// query_id -> (doc_id -> gain).
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// query_id -> ranked list, descending score, ties by ascending doc_id.
using RankedRun = std::map<std::string, std::vector<ScoredDoc>>;

/// Total order used for every ranking: higher score first, then smaller doc_id.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

/// TREC run lines `qid Q0 docid rank score tag`.
void write_trec_run(const std::filesystem::path& path, const RankedRun& run, const std::string& tag);
RankedRun read_trec_run(const std::filesystem::path& path);

/// Qrels lines `qid 0 docid gain` (tab or space separated).
void write_qrels(const std::filesystem::path& path, const Qrels& qrels);
Qrels read_qrels(const std::filesystem::path& path);

}  // namespace recon
