#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "recon/corpus.hpp"
#include "recon/run.hpp"

namespace recon {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Okapi BM25 over hashed token ids with the smoothed, non-negative idf
/// ln(1 + (N - df + 0.5) / (df + 0.5)).
class Bm25Index {
 public:
  Bm25Index(std::vector<std::string> doc_ids, const std::vector<TokenSeq>& docs,
            Bm25Params params = {});

  std::size_t size() const noexcept { return doc_ids_.size(); }
  double avg_len() const noexcept { return avg_len_; }
  const Bm25Params& params() const noexcept { return params_; }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }

  std::size_t doc_freq(TokenId term) const;
  double idf(TokenId term) const;

  /// Throws ConfigError for an unknown doc_id.
  double score(std::span<const TokenId> query_terms, const std::string& doc_id) const;
  double score(std::span<const TokenId> query_terms, std::size_t doc_index) const;

  /// Scores of every document, indexed like doc_ids().
  std::vector<double> score_all(std::span<const TokenId> query_terms) const;

  /// Top-k by score under the deterministic tie rule.
  std::vector<ScoredDoc> search(std::span<const TokenId> query_terms, std::size_t k) const;

  std::size_t index_of(const std::string& doc_id) const;

 private:
  struct Posting {
    std::size_t doc = 0;
    std::size_t tf = 0;
  };

  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::size_t> id_to_index_;
  std::vector<std::size_t> doc_len_;
  double avg_len_ = 0.0;
  std::unordered_map<TokenId, std::vector<Posting>> postings_;
};

/// Smoothed idf as a free function for an arbitrary (df, N).
double bm25_idf(std::size_t df, std::size_t num_docs);

/// Top-`count` BM25 documents excluding the gold one, as indices.
std::vector<std::size_t> mine_bm25_negatives(const Bm25Index& index,
                                             std::span<const TokenId> query_terms,
                                             const std::string& gold_doc_id, std::size_t count);

}  // namespace recon
