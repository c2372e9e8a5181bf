#include "recon/encoder.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "recon/error.hpp"
#include "recon/rng.hpp"

namespace recon {

EncoderParams EncoderParams::initialize(std::size_t vocab_size, std::size_t dim,
                                        std::uint64_t seed, bool normalize, double scale) {
  if (vocab_size < 2) throw ConfigError("encoder: vocab_size must be at least 2");
  if (dim < 2) throw ConfigError("encoder: dim must be at least 2");
  EncoderParams params{Matrix(vocab_size, dim), normalize};
  Rng rng(mix_seed(seed, 0xe4c0de));
  for (double& v : params.table.values()) v = rng.uniform(-scale, scale);
  return params;
}

PooledEncoding encode_pooled(const Matrix& table, bool normalize, const TokenSeq& seq) {
  if (seq.empty()) throw EmptySequenceError("encode: empty token sequence");
  const std::size_t dim = table.cols();
  PooledEncoding enc{Embedding(dim, 0.0), 0.0};
  for (TokenId t : seq.tokens) {
    if (t >= table.rows()) throw DimensionError("encode: token id outside the vocabulary");
    auto row = table.row(t);
    for (std::size_t c = 0; c < dim; ++c) enc.output[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(seq.size());
  double sq = 0.0;
  for (double& v : enc.output) {
    v *= inv;
    sq += v * v;
  }
  enc.pooled_norm = std::sqrt(sq);
  if (normalize) {
    if (enc.pooled_norm > 0.0) {
      for (double& v : enc.output) v /= enc.pooled_norm;
    } else {
      spdlog::warn("encode: pooled vector is zero; returning it unnormalized");
    }
  }
  return enc;
}

Embedding encode(const EncoderParams& params, const TokenSeq& seq) {
  return encode_pooled(params.table, params.normalize, seq).output;
}

double similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("similarity: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot;
}

RowGradient::RowGradient(std::size_t rows, std::size_t cols)
    : dense_(rows, cols), is_touched_(rows, 0) {}

void RowGradient::clear() {
  for (auto r : touched_) {
    for (double& v : dense_.row(r)) v = 0.0;
    is_touched_[r] = 0;
  }
  touched_.clear();
}

std::span<double> RowGradient::row(TokenId token) {
  if (!is_touched_[token]) {
    is_touched_[token] = 1;
    touched_.push_back(token);
  }
  return dense_.row(token);
}

void accumulate_encoder_gradient(const PooledEncoding& encoding, bool normalize,
                                 const TokenSeq& seq, std::span<const double> output_grad,
                                 RowGradient& grad) {
  const std::size_t dim = output_grad.size();
  Embedding pooled_grad(output_grad.begin(), output_grad.end());
  if (normalize) {
    if (encoding.pooled_norm > 0.0) {
      // d(u/|u|)/du = (I - e e^T) / |u|
      const double proj = similarity(output_grad, encoding.output);
      for (std::size_t c = 0; c < dim; ++c) {
        pooled_grad[c] = (output_grad[c] - proj * encoding.output[c]) / encoding.pooled_norm;
      }
    } else {
      return;
    }
  }
  const double inv = 1.0 / static_cast<double>(seq.size());
  for (TokenId t : seq.tokens) {
    auto row = grad.row(t);
    for (std::size_t c = 0; c < dim; ++c) row[c] += pooled_grad[c] * inv;
  }
}

}  // namespace recon
