#include "recon/fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "recon/error.hpp"
#include "recon/loss.hpp"
#include "recon/rng.hpp"

namespace recon {

void FewshotConfig::validate() const {
  if (negatives_per_query == 0) throw ConfigError("fewshot: negatives_per_query must be positive");
  if (batch_size == 0) throw ConfigError("fewshot: batch_size must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("fewshot: lr must be positive");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("fewshot: tau must be positive");
}

std::vector<LabeledExample> read_labeled_examples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open examples file " + path.string());
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object() || !obj.contains("query") || !obj["query"].is_string() ||
        !obj.contains("positive") || !obj["positive"].is_string()) {
      throw ParseError("expected string fields \"query\" and \"positive\"", line_no);
    }
    LabeledExample ex;
    ex.query_id = obj.value("query_id", "line-" + std::to_string(line_no));
    ex.query_text = obj["query"].get<std::string>();
    ex.positive_doc_id = obj["positive"].get<std::string>();
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<FewshotItem> prepare_fewshot(std::span<const Document> corpus,
                                         const std::vector<TokenSeq>& corpus_tokens,
                                         const Bm25Index& bm25, const FewshotConfig& cfg,
                                         std::uint32_t vocab_size) {
  if (corpus.size() != corpus_tokens.size() || bm25.size() != corpus.size()) {
    throw DimensionError("fewshot: corpus, tokens and BM25 index differ in size");
  }
  std::vector<FewshotItem> items;
  items.reserve(cfg.examples.size());
  for (const auto& ex : cfg.examples) {
    FewshotItem item;
    try {
      item.positive = bm25.index_of(ex.positive_doc_id);
    } catch (const ConfigError&) {
      throw ConfigError("few-shot query \"" + ex.query_id + "\": gold document \"" +
                        ex.positive_doc_id + "\" is not in the corpus");
    }
    item.query = tokenize(ex.query_text, vocab_size);
    item.negatives =
        mine_bm25_negatives(bm25, item.query.tokens, ex.positive_doc_id, cfg.negatives_per_query);
    items.push_back(std::move(item));
  }
  return items;
}

EncoderParams fewshot_finetune(const EncoderParams& params, std::span<const Document> corpus,
                               const FewshotConfig& cfg, const Bm25Index& bm25) {
  cfg.validate();
  EncoderParams out = params;
  const auto vocab = static_cast<std::uint32_t>(params.vocab_size());
  const auto tokens = tokenize_corpus(corpus, vocab);
  const auto items = prepare_fewshot(corpus, tokens, bm25, cfg, vocab);
  if (items.empty() || cfg.epochs == 0) return out;

  RowGradient grad(params.vocab_size(), params.dim());
  std::vector<std::size_t> order(items.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(cfg.seed, 0xf5a0000ULL + epoch));
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      grad.clear();
      for (std::size_t b = begin; b < end; ++b) {
        const auto& item = items[order[b]];
        const auto q = encode_pooled(out.table, out.normalize, item.query);
        const auto pos = encode_pooled(out.table, out.normalize, tokens[item.positive]);
        std::vector<PooledEncoding> negs;
        std::vector<double> neg_scores;
        for (std::size_t d : item.negatives) {
          negs.push_back(encode_pooled(out.table, out.normalize, tokens[d]));
          neg_scores.push_back(similarity(q.output, negs.back().output));
        }
        const auto g = info_nce_gradient(similarity(q.output, pos.output), neg_scores, cfg.tau);
        const std::size_t dim = out.dim();
        Embedding dq(dim, 0.0), dpos(dim, 0.0);
        for (std::size_t c = 0; c < dim; ++c) {
          dq[c] += scale * g.d_pos * pos.output[c];
          dpos[c] = scale * g.d_pos * q.output[c];
        }
        for (std::size_t k = 0; k < negs.size(); ++k) {
          Embedding dneg(dim);
          for (std::size_t c = 0; c < dim; ++c) {
            dq[c] += scale * g.d_negs[k] * negs[k].output[c];
            dneg[c] = scale * g.d_negs[k] * q.output[c];
          }
          accumulate_encoder_gradient(negs[k], out.normalize, tokens[item.negatives[k]], dneg, grad);
        }
        accumulate_encoder_gradient(q, out.normalize, item.query, dq, grad);
        accumulate_encoder_gradient(pos, out.normalize, tokens[item.positive], dpos, grad);
      }
      for (auto r : grad.touched_rows()) {
        auto row = out.table.row(r);
        auto g = grad.dense().row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] -= cfg.lr * g[c];
      }
    }
  }
  return out;
}

}  // namespace recon
