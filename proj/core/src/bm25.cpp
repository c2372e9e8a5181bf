#include "recon/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recon/error.hpp"

namespace recon {

double bm25_idf(std::size_t df, std::size_t num_docs) {
  const auto n = static_cast<double>(num_docs);
  const auto f = static_cast<double>(df);
  return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

Bm25Index::Bm25Index(std::vector<std::string> doc_ids, const std::vector<TokenSeq>& docs,
                     Bm25Params params)
    : params_(params), doc_ids_(std::move(doc_ids)) {
  if (doc_ids_.size() != docs.size()) throw DimensionError("bm25: ids and documents differ in count");
  if (doc_ids_.empty()) throw ConfigError("bm25: empty corpus");
  doc_len_.reserve(docs.size());
  std::size_t total = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (!id_to_index_.emplace(doc_ids_[d], d).second) throw DuplicateIdError(doc_ids_[d], 0);
    doc_len_.push_back(docs[d].size());
    total += docs[d].size();
    std::unordered_map<TokenId, std::size_t> tf;
    for (TokenId t : docs[d].tokens) ++tf[t];
    for (const auto& [term, count] : tf) postings_[term].push_back({d, count});
  }
  avg_len_ = static_cast<double>(total) / static_cast<double>(docs.size());
  if (!(avg_len_ > 0.0)) throw ConfigError("bm25: corpus has no tokens");
}

std::size_t Bm25Index::doc_freq(TokenId term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

double Bm25Index::idf(TokenId term) const { return bm25_idf(doc_freq(term), size()); }

std::size_t Bm25Index::index_of(const std::string& doc_id) const {
  auto it = id_to_index_.find(doc_id);
  if (it == id_to_index_.end()) throw ConfigError("bm25: unknown doc_id \"" + doc_id + "\"");
  return it->second;
}

double Bm25Index::score(std::span<const TokenId> query_terms, const std::string& doc_id) const {
  return score(query_terms, index_of(doc_id));
}

double Bm25Index::score(std::span<const TokenId> query_terms, std::size_t doc_index) const {
  const double norm =
      params_.k1 * (1.0 - params_.b + params_.b * static_cast<double>(doc_len_.at(doc_index)) / avg_len_);
  double total = 0.0;
  for (TokenId term : query_terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    auto hit = std::find_if(it->second.begin(), it->second.end(),
                            [&](const Posting& p) { return p.doc == doc_index; });
    if (hit == it->second.end()) continue;
    const auto tf = static_cast<double>(hit->tf);
    total += bm25_idf(it->second.size(), size()) * tf * (params_.k1 + 1.0) / (tf + norm);
  }
  return total;
}

std::vector<double> Bm25Index::score_all(std::span<const TokenId> query_terms) const {
  std::vector<double> scores(size(), 0.0);
  for (TokenId term : query_terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double idf = bm25_idf(it->second.size(), size());
    for (const auto& p : it->second) {
      const auto tf = static_cast<double>(p.tf);
      const double norm = params_.k1 * (1.0 - params_.b +
                                        params_.b * static_cast<double>(doc_len_[p.doc]) / avg_len_);
      scores[p.doc] += idf * tf * (params_.k1 + 1.0) / (tf + norm);
    }
  }
  return scores;
}

std::vector<ScoredDoc> Bm25Index::search(std::span<const TokenId> query_terms, std::size_t k) const {
  const auto scores = score_all(query_terms);
  std::vector<ScoredDoc> ranked;
  ranked.reserve(size());
  for (std::size_t d = 0; d < size(); ++d) ranked.push_back({doc_ids_[d], scores[d]});
  const std::size_t keep = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                    ranks_before);
  ranked.resize(keep);
  return ranked;
}

std::vector<std::size_t> mine_bm25_negatives(const Bm25Index& index,
                                             std::span<const TokenId> query_terms,
                                             const std::string& gold_doc_id, std::size_t count) {
  if (count == 0) throw ConfigError("mine_bm25_negatives: count must be positive");
  const auto ranked = index.search(query_terms, count + 1);
  std::vector<std::size_t> out;
  for (const auto& doc : ranked) {
    if (doc.doc_id == gold_doc_id) continue;
    if (out.size() == count) break;
    out.push_back(index.index_of(doc.doc_id));
  }
  return out;
}

}  // namespace recon
