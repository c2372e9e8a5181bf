#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "recon/bm25.hpp"
#include "recon/corpus.hpp"
#include "recon/encoder.hpp"

namespace recon {

struct LabeledExample {
  std::string query_id;
  std::string query_text;
  std::string positive_doc_id;
};

struct FewshotConfig {
  std::vector<LabeledExample> examples;
  std::size_t negatives_per_query = 8;
  std::size_t epochs = 80;
  std::size_t batch_size = 8;
  double lr = 0.01;
  double tau = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

/// JSONL objects {"query_id": ..., "query": ..., "positive": ...}; query_id
/// is optional and defaults to the line number.
std::vector<LabeledExample> read_labeled_examples(const std::filesystem::path& path);

/// One training query with its gold passage and lexical negatives.
struct FewshotItem {
  TokenSeq query;
  std::size_t positive = 0;
  std::vector<std::size_t> negatives;  ///< never contains `positive`
};

/// Resolves gold ids and mines BM25 negatives. Throws ConfigError naming
/// the query when its gold document is missing from the corpus.
std::vector<FewshotItem> prepare_fewshot(std::span<const Document> corpus,
                                         const std::vector<TokenSeq>& corpus_tokens,
                                         const Bm25Index& bm25, const FewshotConfig& cfg,
                                         std::uint32_t vocab_size);

/// Supervised InfoNCE over (query, gold, BM25 negatives), both sides through
/// the live encoder, mean over each mini-batch, constant learning rate.
EncoderParams fewshot_finetune(const EncoderParams& params, std::span<const Document> corpus,
                               const FewshotConfig& cfg, const Bm25Index& bm25);

}  // namespace recon
