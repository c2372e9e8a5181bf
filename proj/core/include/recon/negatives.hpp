#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recon/encoder.hpp"

namespace recon {

enum class NegativesMode {
  moco,      ///< momentum-encoded documents from a FIFO queue
  in_batch,  ///< other documents' positives in the same batch
};

NegativesMode parse_negatives_mode(std::string_view text);
std::string_view to_string(NegativesMode mode);

/// Slow-moving copy of the encoder table that encodes the document side.
struct MomentumState {
  Matrix table;
  double mu = 0.99;

  /// Exact copy of the live table.
  static MomentumState copy_of(const EncoderParams& params, double mu);

  friend bool operator==(const MomentumState&, const MomentumState&) = default;
};

/// slow <- mu * slow + (1 - mu) * fast, elementwise.
void momentum_update(MomentumState& slow, const EncoderParams& fast);

/// Bounded FIFO of past document embeddings.
class NegativeQueue {
 public:
  NegativeQueue() = default;
  NegativeQueue(std::size_t capacity, std::size_t dim);

  /// Appends in order, evicting the oldest entries beyond capacity.
  void enqueue(std::span<const Embedding> embeddings);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::deque<Embedding>& entries() const noexcept { return entries_; }

  friend bool operator==(const NegativeQueue&, const NegativeQueue&) = default;

 private:
  std::size_t capacity_ = 0;
  std::size_t dim_ = 0;
  std::deque<Embedding> entries_;
};

/// Positive-document embeddings of one batch, grouped by source document.
struct BatchDocEmbeddings {
  std::vector<std::string> doc_ids;
  std::vector<std::vector<Embedding>> positives;
};

/// Negatives for the pair (group_index, positive_index). In moco mode the
/// whole queue; in in_batch mode every positive whose doc_id differs from the
/// query's.
std::vector<Embedding> negatives_for(NegativesMode mode, const NegativeQueue& queue,
                                     const BatchDocEmbeddings& batch, std::size_t group_index,
                                     std::size_t positive_index);

}  // namespace recon
