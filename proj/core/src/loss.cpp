#include "recon/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recon/error.hpp"

namespace recon {

LossMode parse_loss_mode(std::string_view text) {
  if (text == "uniform") return LossMode::uniform;
  if (text == "relevance_doc") return LossMode::relevance_doc;
  if (text == "relevance_batch") return LossMode::relevance_batch;
  throw ConfigError("unknown loss mode \"" + std::string(text) + "\"");
}

std::string_view to_string(LossMode mode) {
  switch (mode) {
    case LossMode::uniform: return "uniform";
    case LossMode::relevance_doc: return "relevance_doc";
    case LossMode::relevance_batch: return "relevance_batch";
  }
  return "?";
}

void LossConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("loss: tau must be positive");
  if (!(weight_floor > 0.0 && weight_floor <= 1e-3)) {
    throw ConfigError("loss: weight_floor must lie in (0, 1e-3]");
  }
}

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteError(std::string("info_nce: non-finite ") + what);
}

}  // namespace

InfoNceGradient info_nce_gradient(double pos, std::span<const double> negs, double tau) {
  if (!(tau > 0.0)) throw ConfigError("info_nce: tau must be positive");
  require_finite(pos, "positive score");
  // Logits relative to the positive: z_0 = 0, z_i = (neg_i - pos) / tau.
  InfoNceGradient out;
  out.d_negs.resize(negs.size());
  double zmax = 0.0;
  for (std::size_t i = 0; i < negs.size(); ++i) {
    require_finite(negs[i], "negative score");
    out.d_negs[i] = (negs[i] - pos) / tau;
    zmax = std::max(zmax, out.d_negs[i]);
  }
  double sum = 0.0;
  if (zmax == 0.0) {
    for (double& z : out.d_negs) {
      z = std::exp(z);
      sum += z;
    }
    out.loss = std::log1p(sum);
    sum += 1.0;
  } else {
    sum = std::exp(-zmax);
    for (double& z : out.d_negs) {
      z = std::exp(z - zmax);
      sum += z;
    }
    out.loss = zmax + std::log(sum);
  }
  // Softmax probabilities scaled by 1/tau.
  for (double& z : out.d_negs) z = z / sum / tau;
  const double p_pos = (zmax == 0.0 ? 1.0 : std::exp(-zmax)) / sum;
  out.d_pos = (p_pos - 1.0) / tau;
  out.loss = std::max(0.0, out.loss);
  return out;
}

double info_nce(double pos, std::span<const double> negs, double tau) {
  return info_nce_gradient(pos, negs, tau).loss;
}

std::vector<double> relevance_weights(std::span<const double> scores, double floor) {
  std::vector<double> w(scores.begin(), scores.end());
  double total = 0.0;
  for (double& v : w) {
    v = std::max(v, floor);
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

void ScoredGroup::validate() const {
  if (pos_scores.empty()) throw ConfigError("scored group has no positives");
  if (neg_scores.size() != pos_scores.size() || weight_scores.size() != pos_scores.size()) {
    throw DimensionError("scored group: per-positive lists differ in length");
  }
  for (const auto& negs : neg_scores) {
    if (negs.size() != neg_scores.front().size()) {
      throw DimensionError("scored group: negative pools differ in size");
    }
  }
}

namespace {

std::size_t common_pairs(std::span<const ScoredGroup> groups) {
  if (groups.empty()) throw ConfigError("loss: empty batch");
  const std::size_t n = groups.front().pos_scores.size();
  for (const auto& g : groups) {
    g.validate();
    if (g.pos_scores.size() != n) throw ConfigError("loss: groups differ in pairs per document");
  }
  return n;
}

}  // namespace

double uniform_loss(std::span<const ScoredGroup> groups, const LossConfig& cfg) {
  const std::size_t n = common_pairs(groups);
  double total = 0.0;
  for (const auto& g : groups) {
    for (std::size_t j = 0; j < n; ++j) total += info_nce(g.pos_scores[j], g.neg_scores[j], cfg.tau);
  }
  return total / static_cast<double>(groups.size() * n);
}

double relevance_loss(std::span<const ScoredGroup> groups, const LossConfig& cfg) {
  const std::size_t n = common_pairs(groups);
  double total = 0.0;
  for (const auto& g : groups) {
    const auto w = relevance_weights(g.weight_scores, cfg.weight_floor);
    for (std::size_t j = 0; j < n; ++j) {
      total += w[j] * info_nce(g.pos_scores[j], g.neg_scores[j], cfg.tau);
    }
  }
  return total / static_cast<double>(groups.size());
}

double batch_relevance_loss(std::span<const ScoredPair> pairs, const LossConfig& cfg) {
  if (pairs.empty()) throw ConfigError("batch_relevance_loss: empty batch");
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& p : pairs) scores.push_back(p.weight_score);
  const auto w = relevance_weights(scores, cfg.weight_floor);
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    total += w[i] * info_nce(pairs[i].pos_score, pairs[i].neg_scores, cfg.tau);
  }
  return total;
}

double batch_loss(std::span<const ScoredGroup> groups, const LossConfig& cfg) {
  switch (cfg.mode) {
    case LossMode::uniform: return uniform_loss(groups, cfg);
    case LossMode::relevance_doc: return relevance_loss(groups, cfg);
    case LossMode::relevance_batch: {
      common_pairs(groups);
      std::vector<ScoredPair> pairs;
      for (const auto& g : groups) {
        for (std::size_t j = 0; j < g.pos_scores.size(); ++j) {
          pairs.push_back({g.pos_scores[j], g.neg_scores[j], g.weight_scores[j]});
        }
      }
      return batch_relevance_loss(pairs, cfg);
    }
  }
  throw ConfigError("loss: unknown mode");
}

}  // namespace recon
