#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "recon/corpus.hpp"
#include "recon/run.hpp"

namespace recon {

/// Shape of a generated corpus with planted topic mixtures.
struct SyntheticSpec {
  std::size_t num_topics = 4;
  std::size_t docs_per_topic = 200;
  double mixed_fraction = 0.5;
  std::size_t tokens_per_doc = 64;
  std::size_t vocab_per_topic = 100;
  std::size_t queries_per_topic = 10;
  std::size_t query_tokens = 12;
  std::uint32_t vocab_size = kDefaultVocabSize;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t total_docs() const { return num_topics * docs_per_topic; }
  std::size_t mixed_count() const;
};

enum class DocKind { coherent, mixed };

/// Tokens in [0, boundary) come from topic_a, tokens in [boundary, len) from
/// topic_b. Coherent documents have topic_a == topic_b and boundary == len.
struct DocLabel {
  DocKind kind = DocKind::coherent;
  std::size_t topic_a = 0;
  std::size_t topic_b = 0;
  std::size_t boundary = 0;

  /// Topic holding the majority of tokens in [start, end); ties go to topic_a.
  std::size_t majority_topic(std::size_t start, std::size_t end) const;

  friend bool operator==(const DocLabel&, const DocLabel&) = default;
};

using LabelMap = std::map<std::string, DocLabel>;

struct SyntheticCorpus {
  std::vector<Document> corpus;
  std::vector<Document> queries;
  Qrels qrels;
  LabelMap labels;
  /// topic_words[t] lists topic t's surface words.
  std::vector<std::vector<std::string>> topic_words;
};

/// Deterministic for a fixed spec. Topic vocabularies are disjoint in hashed
/// token-id space, so the planted structure survives tokenization.
SyntheticCorpus gen_synthetic(const SyntheticSpec& spec);

/// TSV `doc_id<TAB>coherent|mixed<TAB>topicA<TAB>topicB<TAB>boundary`.
void write_labels_tsv(const std::filesystem::path& path, const LabelMap& labels);
LabelMap read_labels_tsv(const std::filesystem::path& path);

}  // namespace recon
