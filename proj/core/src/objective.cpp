#include "recon/objective.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "recon/error.hpp"
#include "recon/parallel.hpp"
#include "recon/rng.hpp"

namespace recon {

namespace {

/// Location of an in-batch negative: positive `pos` of group `group`.
struct PairRef {
  std::size_t group = 0;
  std::size_t pos = 0;
};

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t c = 0; c < y.size(); ++c) y[c] += alpha * x[c];
}

PairWeights compute_weights(const std::vector<std::vector<double>>& pos_scores,
                            const LossConfig& cfg) {
  const std::size_t m = pos_scores.size();
  const std::size_t n = pos_scores.front().size();
  PairWeights w(m);
  switch (cfg.mode) {
    case LossMode::uniform:
      for (auto& row : w) row.assign(n, 1.0 / static_cast<double>(n));
      break;
    case LossMode::relevance_doc:
      for (std::size_t i = 0; i < m; ++i) w[i] = relevance_weights(pos_scores[i], cfg.weight_floor);
      break;
    case LossMode::relevance_batch: {
      std::vector<double> flat;
      flat.reserve(m * n);
      for (const auto& row : pos_scores) flat.insert(flat.end(), row.begin(), row.end());
      const auto all = relevance_weights(flat, cfg.weight_floor);
      for (std::size_t i = 0; i < m; ++i) {
        w[i].assign(all.begin() + static_cast<std::ptrdiff_t>(i * n),
                    all.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
      }
      break;
    }
  }
  return w;
}

}  // namespace

BatchEvaluation evaluate_batch(const EncoderParams& params, std::span<const PositiveGroup> groups,
                               const LossConfig& loss_cfg, const NegativeSource& negatives,
                               RowGradient* grad, const PairWeights* fixed_weights) {
  loss_cfg.validate();
  const std::size_t m = groups.size();
  if (m == 0) throw ConfigError("empty effective batch");
  const std::size_t n = groups.front().pairs();
  if (n == 0) throw ConfigError("positive group without positives");
  for (const auto& g : groups) {
    if (g.pairs() != n) throw ConfigError("groups differ in pairs per document");
  }
  const bool moco = negatives.mode == NegativesMode::moco;
  if (moco) {
    if (negatives.queue == nullptr || negatives.momentum_table == nullptr) {
      throw ConfigError("moco negatives need a queue and a momentum table");
    }
    if (!negatives.momentum_table->same_shape(params.table)) {
      throw DimensionError("momentum table shape differs from the encoder table");
    }
    if (!negatives.queue->empty() && negatives.queue->dim() != params.dim()) {
      throw DimensionError("queue dimension differs from the encoder dimension");
    }
  } else if (m < 2) {
    throw ConfigError("in-batch negatives need at least two groups");
  }
  const std::size_t dim = params.dim();
  const Matrix& doc_table = moco ? *negatives.momentum_table : params.table;

  // Forward encodings.
  std::vector<PooledEncoding> q_enc(m);
  std::vector<std::vector<PooledEncoding>> d_enc(m, std::vector<PooledEncoding>(n));
  parallel_for(m, [&](std::size_t i) {
    q_enc[i] = encode_pooled(params.table, params.normalize, groups[i].query);
    for (std::size_t j = 0; j < n; ++j) {
      d_enc[i][j] = encode_pooled(doc_table, params.normalize, groups[i].positives[j]);
    }
  });

  // Negative pools. Every positive of a group shares its query, so the pool
  // and its scores are per group.
  std::vector<const Embedding*> queue_pool;
  std::vector<std::vector<PairRef>> batch_pool(moco ? 0 : m);
  if (moco) {
    for (const auto& e : negatives.queue->entries()) queue_pool.push_back(&e);
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t g = 0; g < m; ++g) {
        if (groups[g].doc_id == groups[i].doc_id) continue;
        for (std::size_t j = 0; j < n; ++j) batch_pool[i].push_back({g, j});
      }
    }
  }
  auto pool_size = [&](std::size_t i) { return moco ? queue_pool.size() : batch_pool[i].size(); };
  auto pool_vec = [&](std::size_t i, std::size_t k) -> const Embedding& {
    if (moco) return *queue_pool[k];
    const auto ref = batch_pool[i][k];
    return d_enc[ref.group][ref.pos].output;
  };

  BatchEvaluation eval;
  eval.pos_scores.assign(m, std::vector<double>(n));
  std::vector<std::vector<double>> neg_scores(m);
  parallel_for(m, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      eval.pos_scores[i][j] = similarity(q_enc[i].output, d_enc[i][j].output);
    }
    neg_scores[i].resize(pool_size(i));
    for (std::size_t k = 0; k < neg_scores[i].size(); ++k) {
      neg_scores[i][k] = similarity(q_enc[i].output, pool_vec(i, k));
    }
  });

  if (fixed_weights != nullptr) {
    if (fixed_weights->size() != m) throw DimensionError("fixed weights: wrong group count");
    for (const auto& row : *fixed_weights) {
      if (row.size() != n) throw DimensionError("fixed weights: wrong pair count");
    }
    eval.weights = *fixed_weights;
  } else {
    eval.weights = compute_weights(eval.pos_scores, loss_cfg);
  }
  const double group_scale =
      loss_cfg.mode == LossMode::relevance_batch ? 1.0 : 1.0 / static_cast<double>(m);

  // Loss and its gradient with respect to every similarity score.
  std::vector<std::vector<double>> pair_loss(m, std::vector<double>(n));
  std::vector<std::vector<double>> d_pos(m, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> d_neg(m);
  for (std::size_t i = 0; i < m; ++i) {
    d_neg[i].assign(neg_scores[i].size(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const auto g = info_nce_gradient(eval.pos_scores[i][j], neg_scores[i], loss_cfg.tau);
      const double coef = group_scale * eval.weights[i][j];
      pair_loss[i][j] = g.loss;
      eval.loss += coef * g.loss;
      d_pos[i][j] += coef * g.d_pos;
      for (std::size_t k = 0; k < g.d_negs.size(); ++k) d_neg[i][k] += coef * g.d_negs[k];
    }
  }

  if (grad != nullptr && !loss_cfg.detach_weights && fixed_weights == nullptr &&
      loss_cfg.mode != LossMode::uniform) {
    // w_l = c_l / S with c_l = max(s_l, floor): dL/ds_l = [s_l > floor] (L_l - sum_j w_j L_j) / S.
    auto add_weight_terms = [&](std::size_t first_group, std::size_t last_group) {
      double clamped_sum = 0.0;
      double weighted = 0.0;
      for (std::size_t i = first_group; i < last_group; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          clamped_sum += std::max(eval.pos_scores[i][j], loss_cfg.weight_floor);
          weighted += eval.weights[i][j] * pair_loss[i][j];
        }
      }
      for (std::size_t i = first_group; i < last_group; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (eval.pos_scores[i][j] > loss_cfg.weight_floor) {
            d_pos[i][j] += group_scale * (pair_loss[i][j] - weighted) / clamped_sum;
          }
        }
      }
    };
    if (loss_cfg.mode == LossMode::relevance_doc) {
      for (std::size_t i = 0; i < m; ++i) add_weight_terms(i, i + 1);
    } else {
      add_weight_terms(0, m);
    }
  }

  if (grad != nullptr) {
    if (grad->dense().rows() != params.vocab_size() || grad->dense().cols() != dim) {
      throw DimensionError("gradient buffer shape differs from the encoder table");
    }
    std::vector<Embedding> dq(m, Embedding(dim, 0.0));
    parallel_for(m, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j) axpy(d_pos[i][j], d_enc[i][j].output, dq[i]);
      for (std::size_t k = 0; k < d_neg[i].size(); ++k) axpy(d_neg[i][k], pool_vec(i, k), dq[i]);
    });
    for (std::size_t i = 0; i < m; ++i) {
      accumulate_encoder_gradient(q_enc[i], params.normalize, groups[i].query, dq[i], *grad);
    }
    if (!moco) {
      std::vector<std::vector<Embedding>> dd(m, std::vector<Embedding>(n, Embedding(dim, 0.0)));
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) axpy(d_pos[i][j], q_enc[i].output, dd[i][j]);
      }
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < batch_pool[i].size(); ++k) {
          const auto ref = batch_pool[i][k];
          axpy(d_neg[i][k], q_enc[i].output, dd[ref.group][ref.pos]);
        }
      }
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          accumulate_encoder_gradient(d_enc[i][j], params.normalize, groups[i].positives[j],
                                      dd[i][j], *grad);
        }
      }
    }
  }

  eval.doc_embeddings.doc_ids.reserve(m);
  eval.doc_embeddings.positives.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    eval.doc_embeddings.doc_ids.push_back(groups[i].doc_id);
    for (auto& enc : d_enc[i]) eval.doc_embeddings.positives[i].push_back(std::move(enc.output));
  }
  return eval;
}

Matrix backward(const EncoderParams& params, std::span<const PositiveGroup> groups,
                const LossConfig& loss_cfg, const NegativeSource& negatives) {
  RowGradient grad(params.vocab_size(), params.dim());
  evaluate_batch(params, groups, loss_cfg, negatives, &grad);
  return grad.dense();
}

double check_gradients(const EncoderParams& params, std::span<const PositiveGroup> groups,
                       const LossConfig& loss_cfg, const NegativeSource& negatives,
                       const GradientCheckOptions& options) {
  return check_gradients(params, groups, loss_cfg, negatives,
                         backward(params, groups, loss_cfg, negatives), options);
}

double check_gradients(const EncoderParams& params, std::span<const PositiveGroup> groups,
                       const LossConfig& loss_cfg, const NegativeSource& negatives,
                       const Matrix& analytic, const GradientCheckOptions& options) {
  if (!(options.eps >= 1e-7 && options.eps <= 1e-4)) {
    throw ConfigError("check_gradients: eps must lie in [1e-7, 1e-4]");
  }
  if (!analytic.same_shape(params.table)) throw DimensionError("check_gradients: shape mismatch");

  const BatchEvaluation base = evaluate_batch(params, groups, loss_cfg, negatives);
  const PairWeights* fixed = loss_cfg.detach_weights ? &base.weights : nullptr;

  const std::size_t dim = params.dim();
  std::set<std::size_t> entries;
  std::set<TokenId> rows;
  for (const auto& g : groups) {
    rows.insert(g.query.tokens.begin(), g.query.tokens.end());
    for (const auto& p : g.positives) rows.insert(p.tokens.begin(), p.tokens.end());
  }
  if (rows.size() * dim <= options.exhaustive_limit) {
    for (TokenId r : rows) {
      for (std::size_t c = 0; c < dim; ++c) entries.insert(r * dim + c);
    }
  }
  Rng rng(mix_seed(options.seed, 0x9c4ec));
  const std::size_t total = params.vocab_size() * dim;
  for (std::size_t s = 0; s < options.random_samples; ++s) entries.insert(rng.uniform_index(total));

  EncoderParams probe = params;
  auto values = probe.table.values();
  double worst = 0.0;
  for (std::size_t e : entries) {
    const double original = values[e];
    values[e] = original + options.eps;
    const double plus = evaluate_batch(probe, groups, loss_cfg, negatives, nullptr, fixed).loss;
    values[e] = original - options.eps;
    const double minus = evaluate_batch(probe, groups, loss_cfg, negatives, nullptr, fixed).loss;
    values[e] = original;
    const double numeric = (plus - minus) / (2.0 * options.eps);
    const double a = analytic.values()[e];
    if (!std::isfinite(numeric) || !std::isfinite(a)) {
      throw NonFiniteError("check_gradients: non-finite gradient value");
    }
    const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace recon
