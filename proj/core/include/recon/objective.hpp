#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "recon/augment.hpp"
#include "recon/encoder.hpp"
#include "recon/loss.hpp"
#include "recon/negatives.hpp"

namespace recon {

/// Where the document side and the negatives come from.
struct NegativeSource {
  NegativesMode mode = NegativesMode::moco;
  const NegativeQueue* queue = nullptr;    ///< required in moco mode
  const Matrix* momentum_table = nullptr;  ///< required in moco mode
};

/// Normalized pair weights indexed [group][positive].
using PairWeights = std::vector<std::vector<double>>;

struct BatchEvaluation {
  double loss = 0.0;
  /// uniform: 1/n; relevance_doc: sums to 1 per group; relevance_batch: sums
  /// to 1 over the batch.
  PairWeights weights;
  /// Raw similarities s(q_i, d_ij), also the detached weight scores.
  std::vector<std::vector<double>> pos_scores;
  /// Document-side embeddings of the positives, in group order.
  BatchDocEmbeddings doc_embeddings;
};

/// Forward pass of the batch loss; when `grad` is non-null also accumulates
/// the gradient with respect to the live table. With `fixed_weights` the pair
/// weights are taken as given instead of being recomputed.
BatchEvaluation evaluate_batch(const EncoderParams& params, std::span<const PositiveGroup> groups,
                               const LossConfig& loss_cfg, const NegativeSource& negatives,
                               RowGradient* grad = nullptr,
                               const PairWeights* fixed_weights = nullptr);

/// Analytic gradient of the batch loss with respect to every table entry.
Matrix backward(const EncoderParams& params, std::span<const PositiveGroup> groups,
                const LossConfig& loss_cfg, const NegativeSource& negatives);

struct GradientCheckOptions {
  double eps = 1e-5;
  std::size_t random_samples = 200;
  /// Every entry of every row touched by the batch is also checked when the
  /// touched rows hold at most this many entries.
  std::size_t exhaustive_limit = 4096;
  std::uint64_t seed = 0;
};

/// Max over sampled entries of |analytic - numeric| / max(1, |analytic|, |numeric|)
/// using central differences. Detached weights are held fixed while probing.
double check_gradients(const EncoderParams& params, std::span<const PositiveGroup> groups,
                       const LossConfig& loss_cfg, const NegativeSource& negatives,
                       const GradientCheckOptions& options = {});

/// Same as above against a caller-supplied analytic gradient.
double check_gradients(const EncoderParams& params, std::span<const PositiveGroup> groups,
                       const LossConfig& loss_cfg, const NegativeSource& negatives,
                       const Matrix& analytic, const GradientCheckOptions& options = {});

}  // namespace recon
