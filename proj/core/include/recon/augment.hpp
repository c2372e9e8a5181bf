#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "recon/corpus.hpp"
#include "recon/rng.hpp"

namespace recon {

/// Random-cropping settings. `pairs` is the number of positives per document.
struct CropConfig {
  std::size_t pairs = 4;
  double min_ratio = 0.1;
  double max_ratio = 0.5;
  std::size_t min_span_tokens = 8;

  void validate() const;

  /// Inclusive span-length range for a document of `doc_len` tokens, or
  /// nullopt when no length satisfies both the ratio and minimum bounds.
  std::optional<std::pair<std::size_t, std::size_t>> length_range(std::size_t doc_len) const;
  bool croppable(std::size_t doc_len) const { return length_range(doc_len).has_value(); }
};

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct CroppedSpan {
  TokenSeq tokens;
  Span offsets;
};

/// One fixed query span and `pairs` positive spans cut from the same document.
/// span_offsets[0] belongs to the query, span_offsets[1 + j] to positives[j].
struct PositiveGroup {
  std::string doc_id;
  TokenSeq query;
  std::vector<TokenSeq> positives;
  std::vector<Span> span_offsets;

  std::size_t pairs() const noexcept { return positives.size(); }
};

/// Draws a span length uniformly from cfg.length_range(len), then a start
/// uniformly from [0, len - length]. nullopt signals a document too short to
/// crop; callers skip it.
std::optional<CroppedSpan> sample_span(const TokenSeq& doc, const CropConfig& cfg, Rng& rng);

/// Draws pairs + 1 independent spans; the first becomes the query.
std::optional<PositiveGroup> make_group(const std::string& doc_id, const TokenSeq& doc,
                                        const CropConfig& cfg, Rng& rng);

}  // namespace recon
