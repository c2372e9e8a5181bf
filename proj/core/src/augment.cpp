#include "recon/augment.hpp"

#include <algorithm>
#include <cmath>

#include "recon/error.hpp"

namespace recon {

void CropConfig::validate() const {
  if (pairs == 0) throw ConfigError("crop: pairs per document must be at least 1");
  if (!(min_ratio > 0.0 && min_ratio <= 1.0)) throw ConfigError("crop: min_ratio must lie in (0, 1]");
  if (!(max_ratio > 0.0 && max_ratio <= 1.0)) throw ConfigError("crop: max_ratio must lie in (0, 1]");
  if (min_ratio > max_ratio) throw ConfigError("crop: min_ratio exceeds max_ratio");
  if (min_span_tokens == 0) throw ConfigError("crop: min_span_tokens must be positive");
}

namespace {

// Ceiling that ignores floating noise such as 0.1 * 30 = 3.0000000000000004.
std::size_t ratio_ceil(double ratio, std::size_t len) {
  const double x = ratio * static_cast<double>(len);
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

}  // namespace

std::optional<std::pair<std::size_t, std::size_t>> CropConfig::length_range(
    std::size_t doc_len) const {
  if (doc_len < min_span_tokens) return std::nullopt;
  const std::size_t lo = std::max(min_span_tokens, ratio_ceil(min_ratio, doc_len));
  const std::size_t hi = std::min(doc_len, ratio_ceil(max_ratio, doc_len));
  if (lo > hi) return std::nullopt;
  return std::pair{lo, hi};
}

std::optional<CroppedSpan> sample_span(const TokenSeq& doc, const CropConfig& cfg, Rng& rng) {
  const auto range = cfg.length_range(doc.size());
  if (!range) return std::nullopt;
  const auto length = static_cast<std::size_t>(rng.uniform_int(
      static_cast<std::int64_t>(range->first), static_cast<std::int64_t>(range->second)));
  const auto start = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(doc.size() - length)));
  return CroppedSpan{doc.slice(start, start + length), Span{start, start + length}};
}

std::optional<PositiveGroup> make_group(const std::string& doc_id, const TokenSeq& doc,
                                        const CropConfig& cfg, Rng& rng) {
  if (!cfg.croppable(doc.size())) return std::nullopt;
  PositiveGroup group;
  group.doc_id = doc_id;
  group.positives.reserve(cfg.pairs);
  group.span_offsets.reserve(cfg.pairs + 1);
  for (std::size_t k = 0; k <= cfg.pairs; ++k) {
    auto span = sample_span(doc, cfg, rng);
    if (!span) return std::nullopt;
    group.span_offsets.push_back(span->offsets);
    if (k == 0) {
      group.query = std::move(span->tokens);
    } else {
      group.positives.push_back(std::move(span->tokens));
    }
  }
  return group;
}

}  // namespace recon
