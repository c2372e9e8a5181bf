#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "recon/corpus.hpp"

namespace recon {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  double& at(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using Embedding = std::vector<double>;

/// Token-embedding table shared by the query and document sides.
struct EncoderParams {
  Matrix table;
  bool normalize = true;

  std::size_t vocab_size() const noexcept { return table.rows(); }
  std::size_t dim() const noexcept { return table.cols(); }

  /// Entries i.i.d. uniform in [-scale, scale] from `seed`.
  static EncoderParams initialize(std::size_t vocab_size, std::size_t dim, std::uint64_t seed,
                                  bool normalize = true, double scale = 0.05);

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

/// Output of one forward pass with what the backward pass needs.
struct PooledEncoding {
  Embedding output;
  double pooled_norm = 0.0;  ///< norm of the mean-pooled vector before normalization
};

/// Mean of table rows indexed by seq, then L2 normalization when `normalize`.
/// A zero pooled vector under normalization is returned unchanged with a warning.
PooledEncoding encode_pooled(const Matrix& table, bool normalize, const TokenSeq& seq);

Embedding encode(const EncoderParams& params, const TokenSeq& seq);

/// Dot product. Cosine similarity when both sides are normalized.
double similarity(std::span<const double> a, std::span<const double> b);

/// Row-sparse gradient buffer over a V x d table. clear() only touches rows
/// written since the last clear.
class RowGradient {
 public:
  RowGradient(std::size_t rows, std::size_t cols);

  void clear();
  std::span<double> row(TokenId token);
  std::span<const std::uint32_t> touched_rows() const noexcept { return touched_; }
  const Matrix& dense() const noexcept { return dense_; }

 private:
  Matrix dense_;
  std::vector<std::uint8_t> is_touched_;
  std::vector<std::uint32_t> touched_;
};

/// Backpropagates d(loss)/d(output) of one encode_pooled call into `grad`.
void accumulate_encoder_gradient(const PooledEncoding& encoding, bool normalize,
                                 const TokenSeq& seq, std::span<const double> output_grad,
                                 RowGradient& grad);

}  // namespace recon
