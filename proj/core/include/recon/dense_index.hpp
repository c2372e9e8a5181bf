#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "recon/corpus.hpp"
#include "recon/encoder.hpp"
#include "recon/run.hpp"

namespace recon {

/// One encoded row per document; exact inner-product search.
struct DenseIndex {
  std::vector<std::string> doc_ids;
  Matrix matrix;

  std::size_t size() const noexcept { return doc_ids.size(); }
};

DenseIndex build_index(const EncoderParams& params, std::span<const Document> corpus);

/// Top-k rows by dot product, ties by ascending doc_id. k > N returns all N.
std::vector<ScoredDoc> search(const DenseIndex& index, std::span<const double> query, std::size_t k);

/// Encodes every query and searches the index.
RankedRun dense_run(const EncoderParams& params, const DenseIndex& index,
                    std::span<const Document> queries, std::size_t k);

/// Binary file: magic "RIDX", u32 version, u64 N, u64 d, then per row the
/// u64-length-prefixed id and d f64 values, little-endian.
void save_index(const std::filesystem::path& path, const DenseIndex& index);
DenseIndex load_index(const std::filesystem::path& path);

}  // namespace recon
