#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace recon {

enum class LossMode {
  uniform,          ///< plain mean of InfoNCE over all pairs
  relevance_doc,    ///< weights normalized among the pairs of one document
  relevance_batch,  ///< weights normalized across every pair of the batch
};

LossMode parse_loss_mode(std::string_view text);
std::string_view to_string(LossMode mode);

struct LossConfig {
  double tau = 0.5;
  LossMode mode = LossMode::relevance_doc;
  double weight_floor = 1e-6;
  /// When false, gradients also flow through the relevance weights.
  bool detach_weights = true;

  void validate() const;
};

/// -log softmax of the positive among {pos} U negs at temperature tau.
double info_nce(double pos, std::span<const double> negs, double tau);

struct InfoNceGradient {
  double loss = 0.0;
  double d_pos = 0.0;
  std::vector<double> d_negs;
};

InfoNceGradient info_nce_gradient(double pos, std::span<const double> negs, double tau);

/// Clamp each score at `floor`, then divide by the clamped sum.
std::vector<double> relevance_weights(std::span<const double> scores, double floor);

/// Scores for one document: n positives sharing one query.
struct ScoredGroup {
  std::vector<double> pos_scores;
  /// neg_scores[j] holds the D negative similarities seen by positive j.
  std::vector<std::vector<double>> neg_scores;
  std::vector<double> weight_scores;

  void validate() const;
};

struct ScoredPair {
  double pos_score = 0.0;
  std::vector<double> neg_scores;
  double weight_score = 0.0;
};

/// (1/(m n)) sum of InfoNCE over every pair.
double uniform_loss(std::span<const ScoredGroup> groups, const LossConfig& cfg);

/// (1/m) sum_i sum_j w_ij InfoNCE_ij with w normalized within each group.
double relevance_loss(std::span<const ScoredGroup> groups, const LossConfig& cfg);

/// sum_i w_i InfoNCE_i with w normalized over the whole batch.
double batch_relevance_loss(std::span<const ScoredPair> pairs, const LossConfig& cfg);

/// Dispatches on cfg.mode. relevance_batch flattens every pair of every group.
double batch_loss(std::span<const ScoredGroup> groups, const LossConfig& cfg);

}  // namespace recon
