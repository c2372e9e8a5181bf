#include "recon/negatives.hpp"

#include <string>

#include "recon/error.hpp"

namespace recon {

NegativesMode parse_negatives_mode(std::string_view text) {
  if (text == "moco") return NegativesMode::moco;
  if (text == "in_batch") return NegativesMode::in_batch;
  throw ConfigError("unknown negatives mode \"" + std::string(text) + "\"");
}

std::string_view to_string(NegativesMode mode) {
  return mode == NegativesMode::moco ? "moco" : "in_batch";
}

MomentumState MomentumState::copy_of(const EncoderParams& params, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("momentum: mu must lie in [0, 1]");
  return MomentumState{params.table, mu};
}

void momentum_update(MomentumState& slow, const EncoderParams& fast) {
  if (!slow.table.same_shape(fast.table)) throw DimensionError("momentum_update: shape mismatch");
  auto s = slow.table.values();
  auto f = fast.table.values();
  const double mu = slow.mu;
  const double rest = 1.0 - mu;
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = mu * s[i] + rest * f[i];
}

NegativeQueue::NegativeQueue(std::size_t capacity, std::size_t dim)
    : capacity_(capacity), dim_(dim) {
  if (capacity == 0) throw ConfigError("negative queue: capacity must be positive");
}

void NegativeQueue::enqueue(std::span<const Embedding> embeddings) {
  for (const auto& e : embeddings) {
    if (e.size() != dim_) throw DimensionError("negative queue: embedding dimension mismatch");
  }
  const std::size_t skip = embeddings.size() > capacity_ ? embeddings.size() - capacity_ : 0;
  for (std::size_t i = skip; i < embeddings.size(); ++i) {
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(embeddings[i]);
  }
}

std::vector<Embedding> negatives_for(NegativesMode mode, const NegativeQueue& queue,
                                     const BatchDocEmbeddings& batch, std::size_t group_index,
                                     std::size_t positive_index) {
  if (group_index >= batch.doc_ids.size() ||
      positive_index >= batch.positives.at(group_index).size()) {
    throw ConfigError("negatives_for: pair index out of range");
  }
  if (mode == NegativesMode::moco) {
    return {queue.entries().begin(), queue.entries().end()};
  }
  if (batch.doc_ids.size() < 2) throw ConfigError("in-batch negatives need at least two groups");
  const std::string& own = batch.doc_ids[group_index];
  std::vector<Embedding> out;
  for (std::size_t g = 0; g < batch.doc_ids.size(); ++g) {
    if (batch.doc_ids[g] == own) continue;
    out.insert(out.end(), batch.positives[g].begin(), batch.positives[g].end());
  }
  return out;
}

}  // namespace recon
