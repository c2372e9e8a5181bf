#include "recon/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "recon/error.hpp"
#include "recon/rng.hpp"

namespace recon {

void SyntheticSpec::validate() const {
  if (num_topics == 0) throw ConfigError("synthetic: num_topics must be positive");
  if (docs_per_topic == 0) throw ConfigError("synthetic: docs_per_topic must be positive");
  if (tokens_per_doc == 0) throw ConfigError("synthetic: tokens_per_doc must be positive");
  if (vocab_per_topic == 0) throw ConfigError("synthetic: vocab_per_topic must be positive");
  if (query_tokens == 0) throw ConfigError("synthetic: query_tokens must be positive");
  if (!(mixed_fraction >= 0.0 && mixed_fraction <= 1.0)) {
    throw ConfigError("synthetic: mixed_fraction must lie in [0, 1]");
  }
  if (vocab_size < 2) throw ConfigError("synthetic: vocab_size must be at least 2");
  if (2 * num_topics * vocab_per_topic > vocab_size) {
    throw ConfigError("synthetic: topic vocabularies need at most half of vocab_size");
  }
  if (mixed_count() > 0) {
    if (num_topics < 2) throw ConfigError("synthetic: mixed documents need at least two topics");
    if (tokens_per_doc < 2) throw ConfigError("synthetic: mixed documents need two tokens");
  }
}

std::size_t SyntheticSpec::mixed_count() const {
  return static_cast<std::size_t>(std::llround(mixed_fraction * static_cast<double>(total_docs())));
}

std::size_t DocLabel::majority_topic(std::size_t start, std::size_t end) const {
  const std::size_t a_end = std::clamp(boundary, start, end);
  const std::size_t from_a = a_end - start;
  const std::size_t from_b = end - a_end;
  return from_a >= from_b ? topic_a : topic_b;
}

namespace {

std::string random_word(Rng& rng) {
  const auto len = static_cast<std::size_t>(rng.uniform_int(5, 8));
  std::string word(len, 'a');
  for (auto& c : word) c = static_cast<char>('a' + rng.uniform_index(26));
  return word;
}

std::string numbered(const char* prefix, std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
  return buf;
}

std::string join_words(const std::vector<std::string>& words,
                       const std::vector<std::size_t>& picks) {
  std::string text;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (i > 0) text.push_back(' ');
    text += words[picks[i]];
  }
  return text;
}

}  // namespace

SyntheticCorpus gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(mix_seed(spec.seed, 0x5eed));
  SyntheticCorpus out;

  // Topic vocabularies, disjoint after hashing.
  std::unordered_set<TokenId> used_ids;
  out.topic_words.resize(spec.num_topics);
  for (auto& words : out.topic_words) {
    while (words.size() < spec.vocab_per_topic) {
      std::string word = random_word(rng);
      if (used_ids.insert(token_id(word, spec.vocab_size)).second) words.push_back(std::move(word));
    }
  }

  const std::size_t total = spec.total_docs();
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<bool> is_mixed(total, false);
  for (std::size_t i = 0; i < spec.mixed_count(); ++i) is_mixed[order[i]] = true;

  const int id_width = total > 99999 ? 9 : 5;
  out.corpus.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    DocLabel label;
    label.topic_a = idx / spec.docs_per_topic;
    label.topic_b = label.topic_a;
    label.boundary = spec.tokens_per_doc;
    if (is_mixed[idx]) {
      label.kind = DocKind::mixed;
      const auto shift = 1 + rng.uniform_index(spec.num_topics - 1);
      label.topic_b = (label.topic_a + shift) % spec.num_topics;
      const auto len = static_cast<std::int64_t>(spec.tokens_per_doc);
      const std::int64_t lo = std::max<std::int64_t>(1, len / 4);
      const std::int64_t hi = std::max<std::int64_t>(lo, std::min(len - 1, (3 * len) / 4));
      label.boundary = static_cast<std::size_t>(rng.uniform_int(lo, hi));
    }
    std::string text;
    for (std::size_t pos = 0; pos < spec.tokens_per_doc; ++pos) {
      const auto& words = out.topic_words[pos < label.boundary ? label.topic_a : label.topic_b];
      if (pos > 0) text.push_back(' ');
      text += words[rng.uniform_index(words.size())];
    }
    Document doc{numbered("doc-", idx, id_width), std::move(text), {}};
    out.labels.emplace(doc.id, label);
    out.corpus.push_back(std::move(doc));
  }

  for (std::size_t topic = 0; topic < spec.num_topics; ++topic) {
    for (std::size_t q = 0; q < spec.queries_per_topic; ++q) {
      std::vector<std::size_t> picks(spec.query_tokens);
      for (auto& p : picks) p = rng.uniform_index(spec.vocab_per_topic);
      Document query{numbered("q-", topic * spec.queries_per_topic + q, 4),
                     join_words(out.topic_words[topic], picks),
                     {{"topic", std::to_string(topic)}}};
      std::map<std::string, int> relevant;
      for (const auto& doc : out.corpus) {
        const auto& label = out.labels.at(doc.id);
        if (label.kind == DocKind::coherent && label.topic_a == topic) relevant[doc.id] = 1;
      }
      if (!relevant.empty()) out.qrels[query.id] = std::move(relevant);
      out.queries.push_back(std::move(query));
    }
  }
  return out;
}

void write_labels_tsv(const std::filesystem::path& path, const LabelMap& labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write labels file " + path.string());
  for (const auto& [id, label] : labels) {
    out << id << '\t' << (label.kind == DocKind::mixed ? "mixed" : "coherent") << '\t'
        << label.topic_a << '\t' << label.topic_b << '\t' << label.boundary << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

LabelMap read_labels_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels file " + path.string());
  LabelMap labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, kind;
    DocLabel label;
    if (!(ss >> id >> kind >> label.topic_a >> label.topic_b >> label.boundary)) {
      throw ParseError("expected doc_id, kind, topicA, topicB, boundary", line_no);
    }
    if (kind == "mixed") {
      label.kind = DocKind::mixed;
    } else if (kind == "coherent") {
      label.kind = DocKind::coherent;
    } else {
      throw ParseError("unknown label kind \"" + kind + "\"", line_no);
    }
    if (!labels.emplace(id, label).second) throw DuplicateIdError(id, line_no);
  }
  return labels;
}

}  // namespace recon
