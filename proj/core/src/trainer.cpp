#include "recon/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "recon/checkpoint.hpp"
#include "recon/error.hpp"
#include "recon/objective.hpp"
#include "recon/rng.hpp"

namespace recon {

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer \"" + std::string(text) + "\"");
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

void TrainConfig::validate() const {
  if (warmup_steps > total_steps) throw ConfigError("train: warmup_steps exceeds total_steps");
  if (!(peak_lr > 0.0) || !std::isfinite(peak_lr)) throw ConfigError("train: peak_lr must be positive");
  if (batch_groups == 0) throw ConfigError("train: batch_groups must be positive");
  if (negatives == NegativesMode::in_batch && batch_groups < 2) {
    throw ConfigError("train: in-batch negatives need batch_groups >= 2");
  }
  if (queue_capacity == 0) throw ConfigError("train: queue_capacity must be positive");
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("train: mu must lie in [0, 1]");
  if (checkpoint_every == 0) throw ConfigError("train: checkpoint_every must be positive");
  if (vocab_size < 2) throw ConfigError("train: vocab_size must be at least 2");
  if (dim < 2) throw ConfigError("train: dim must be at least 2");
  if (!(init_scale > 0.0)) throw ConfigError("train: init_scale must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_eps > 0.0)) {
    throw ConfigError("train: invalid adam hyper-parameters");
  }
  crop.validate();
  loss.validate();
}

double lr_at(std::size_t step, const TrainConfig& cfg) {
  if (step >= cfg.total_steps) throw ConfigError("lr_at: step outside [0, total_steps)");
  const auto s = static_cast<double>(step);
  if (step < cfg.warmup_steps) return cfg.peak_lr * s / static_cast<double>(cfg.warmup_steps);
  return cfg.peak_lr * static_cast<double>(cfg.total_steps - step) /
         static_cast<double>(cfg.total_steps - cfg.warmup_steps);
}

TrainState init_state(const TrainConfig& cfg) {
  cfg.validate();
  TrainState state;
  state.params =
      EncoderParams::initialize(cfg.vocab_size, cfg.dim, cfg.seed, cfg.normalize, cfg.init_scale);
  if (cfg.negatives == NegativesMode::moco) {
    state.momentum = MomentumState::copy_of(state.params, cfg.mu);
  }
  state.queue = NegativeQueue(cfg.queue_capacity, cfg.dim);
  if (cfg.optimizer == OptimizerKind::adam) {
    state.adam = AdamState{Matrix(cfg.vocab_size, cfg.dim), Matrix(cfg.vocab_size, cfg.dim), 0};
  }
  return state;
}

std::vector<TrainingDoc> prepare_corpus(std::span<const Document> docs, std::uint32_t vocab_size) {
  auto tokens = tokenize_corpus(docs, vocab_size);
  std::vector<TrainingDoc> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) out.push_back({docs[i].id, std::move(tokens[i])});
  return out;
}

std::string metrics_json(const StepMetrics& metrics) {
  nlohmann::json obj{{"step", metrics.step},   {"loss", metrics.loss},   {"lr", metrics.lr},
                     {"w_mean", metrics.w_mean}, {"w_min", metrics.w_min}, {"w_max", metrics.w_max}};
  obj["w_cross_topic"] = metrics.w_cross_topic ? nlohmann::json(*metrics.w_cross_topic) : nullptr;
  obj["w_same_topic"] = metrics.w_same_topic ? nlohmann::json(*metrics.w_same_topic) : nullptr;
  return obj.dump();
}

bool is_cross_topic(const DocLabel& label, const Span& query, const Span& positive) {
  return label.majority_topic(query.start, query.end) !=
         label.majority_topic(positive.start, positive.end);
}

std::vector<std::size_t> batch_indices(std::size_t step, std::size_t corpus_size,
                                       const TrainConfig& cfg) {
  const std::size_t per_epoch = corpus_size / cfg.batch_groups;
  if (per_epoch == 0) throw ConfigError("corpus has fewer documents than batch_groups");
  const std::size_t epoch = step / per_epoch;
  const std::size_t offset = (step % per_epoch) * cfg.batch_groups;
  std::vector<std::size_t> order(corpus_size);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(cfg.seed, 0xe90c0000ULL + epoch));
  rng.shuffle(std::span<std::size_t>(order));
  return {order.begin() + static_cast<std::ptrdiff_t>(offset),
          order.begin() + static_cast<std::ptrdiff_t>(offset + cfg.batch_groups)};
}

namespace {

RowGradient& gradient_buffer(std::size_t rows, std::size_t cols) {
  thread_local std::optional<RowGradient> buffer;
  if (!buffer || buffer->dense().rows() != rows || buffer->dense().cols() != cols) {
    buffer.emplace(rows, cols);
  }
  buffer->clear();
  return *buffer;
}

void apply_sgd(EncoderParams& params, const RowGradient& grad, double lr) {
  for (auto r : grad.touched_rows()) {
    auto row = params.table.row(r);
    auto g = grad.dense().row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] -= lr * g[c];
  }
}

// Lazy Adam: moments of rows absent from the batch are left untouched.
void apply_adam(EncoderParams& params, AdamState& adam, const RowGradient& grad, double lr,
                const TrainConfig& cfg) {
  ++adam.updates;
  const double t = static_cast<double>(adam.updates);
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
  for (auto r : grad.touched_rows()) {
    auto row = params.table.row(r);
    auto g = grad.dense().row(r);
    auto m1 = adam.first_moment.row(r);
    auto m2 = adam.second_moment.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      m1[c] = cfg.adam_beta1 * m1[c] + (1.0 - cfg.adam_beta1) * g[c];
      m2[c] = cfg.adam_beta2 * m2[c] + (1.0 - cfg.adam_beta2) * g[c] * g[c];
      row[c] -= lr * (m1[c] / c1) / (std::sqrt(m2[c] / c2) + cfg.adam_eps);
    }
  }
}

std::uint64_t augment_seed(std::uint64_t seed, std::uint64_t step, const std::string& doc_id) {
  return mix_seed(mix_seed(seed, step), fnv1a64(doc_id));
}

}  // namespace

StepMetrics train_step(TrainState& state, std::span<const TrainingDoc* const> batch,
                       const TrainConfig& cfg, const LabelMap* labels) {
  const std::size_t step = state.step;
  StepMetrics metrics;
  metrics.step = step;
  metrics.lr = lr_at(step, cfg);

  std::vector<PositiveGroup> groups;
  groups.reserve(batch.size());
  for (const TrainingDoc* doc : batch) {
    Rng rng(augment_seed(cfg.seed, step, doc->id));
    if (auto group = make_group(doc->id, doc->tokens, cfg.crop, rng)) {
      groups.push_back(std::move(*group));
    } else {
      ++metrics.skipped;
    }
  }
  if (groups.empty()) throw Error("empty effective batch at step " + std::to_string(step));

  const bool moco = cfg.negatives == NegativesMode::moco;
  if (moco && !state.momentum) state.momentum = MomentumState::copy_of(state.params, cfg.mu);
  NegativeSource source{cfg.negatives, &state.queue, moco ? &state.momentum->table : nullptr};

  RowGradient& grad = gradient_buffer(state.params.vocab_size(), state.params.dim());
  BatchEvaluation eval = evaluate_batch(state.params, groups, cfg.loss, source, &grad);
  if (!std::isfinite(eval.loss)) throw NonFiniteError("non-finite loss at step " + std::to_string(step));

  if (cfg.optimizer == OptimizerKind::adam) {
    if (!state.adam) {
      state.adam = AdamState{Matrix(state.params.vocab_size(), state.params.dim()),
                             Matrix(state.params.vocab_size(), state.params.dim()), 0};
    }
    apply_adam(state.params, *state.adam, grad, metrics.lr, cfg);
  } else {
    apply_sgd(state.params, grad, metrics.lr);
  }

  if (moco) {
    momentum_update(*state.momentum, state.params);
    for (const auto& docs : eval.doc_embeddings.positives) state.queue.enqueue(docs);
  }
  state.step = step + 1;

  metrics.loss = eval.loss;
  metrics.groups = groups.size();
  metrics.w_min = std::numeric_limits<double>::infinity();
  metrics.w_max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t count = 0;
  double cross_sum = 0.0, same_sum = 0.0;
  std::size_t cross_n = 0, same_n = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    double group_sum = 0.0;
    const DocLabel* label = nullptr;
    if (labels != nullptr) {
      if (auto it = labels->find(groups[i].doc_id); it != labels->end()) label = &it->second;
    }
    for (std::size_t j = 0; j < groups[i].pairs(); ++j) {
      const double w = eval.weights[i][j];
      group_sum += w;
      sum += w;
      ++count;
      metrics.w_min = std::min(metrics.w_min, w);
      metrics.w_max = std::max(metrics.w_max, w);
      if (label != nullptr) {
        if (is_cross_topic(*label, groups[i].span_offsets[0], groups[i].span_offsets[j + 1])) {
          cross_sum += w;
          ++cross_n;
        } else {
          same_sum += w;
          ++same_n;
        }
      }
    }
    metrics.group_weight_sums.push_back(group_sum);
  }
  metrics.w_mean = sum / static_cast<double>(count);
  if (cross_n > 0) metrics.w_cross_topic = cross_sum / static_cast<double>(cross_n);
  if (same_n > 0) metrics.w_same_topic = same_sum / static_cast<double>(same_n);
  return metrics;
}

void train_until_done(TrainState& state, std::span<const TrainingDoc> corpus,
                      const TrainConfig& cfg, const PretrainOptions& options) {
  cfg.validate();
  if (state.params.vocab_size() != cfg.vocab_size || state.params.dim() != cfg.dim) {
    throw ConfigError("checkpoint shape differs from the configured vocab_size/dim");
  }
  std::vector<const TrainingDoc*> batch(cfg.batch_groups);
  while (state.step < cfg.total_steps) {
    const auto indices = batch_indices(state.step, corpus.size(), cfg);
    for (std::size_t i = 0; i < indices.size(); ++i) batch[i] = &corpus[indices[i]];
    const StepMetrics metrics = train_step(state, batch, cfg, options.labels);
    if (options.metrics_log != nullptr) *options.metrics_log << metrics_json(metrics) << '\n';
    if (options.on_step) options.on_step(metrics);
    if (!options.checkpoint_path.empty() && state.step % cfg.checkpoint_every == 0 &&
        state.step < cfg.total_steps) {
      auto path = options.checkpoint_path;
      path += ".step-" + std::to_string(state.step);
      save_checkpoint(path, state);
      spdlog::info("step {}: loss {:.6f}, checkpoint {}", state.step, metrics.loss, path.string());
    }
  }
}

TrainState pretrain(std::span<const Document> corpus, const TrainConfig& cfg,
                    const PretrainOptions& options) {
  cfg.validate();
  const auto docs = prepare_corpus(corpus, cfg.vocab_size);
  TrainState state = init_state(cfg);
  train_until_done(state, docs, cfg, options);
  return state;
}

TrainState continue_pretrain(const TrainState& loaded, std::span<const Document> target_corpus,
                             const TrainConfig& cfg, const PretrainOptions& options) {
  cfg.validate();
  TrainState state;
  state.params = loaded.params;
  state.params.normalize = cfg.normalize;
  if (cfg.negatives == NegativesMode::moco) {
    state.momentum = loaded.momentum ? *loaded.momentum : MomentumState::copy_of(state.params, cfg.mu);
    state.momentum->mu = cfg.mu;
  }
  state.queue = NegativeQueue(cfg.queue_capacity, state.params.dim());
  if (cfg.optimizer == OptimizerKind::adam) {
    state.adam = AdamState{Matrix(state.params.vocab_size(), state.params.dim()),
                           Matrix(state.params.vocab_size(), state.params.dim()), 0};
  }
  const auto docs = prepare_corpus(target_corpus, cfg.vocab_size);
  train_until_done(state, docs, cfg, options);
  return state;
}

WeightDiagnostics relevance_diagnostics(const TrainState& state,
                                        std::span<const TrainingDoc> corpus,
                                        const LabelMap& labels, const TrainConfig& cfg,
                                        std::uint64_t seed) {
  const Matrix& doc_table =
      (cfg.negatives == NegativesMode::moco && state.momentum) ? state.momentum->table
                                                               : state.params.table;
  WeightDiagnostics out;
  double same = 0.0, cross = 0.0;
  for (const auto& doc : corpus) {
    auto label = labels.find(doc.id);
    if (label == labels.end()) continue;
    Rng rng(mix_seed(seed, fnv1a64(doc.id)));
    auto group = make_group(doc.id, doc.tokens, cfg.crop, rng);
    if (!group) continue;
    const auto q = encode_pooled(state.params.table, state.params.normalize, group->query).output;
    std::vector<double> scores;
    for (const auto& p : group->positives) {
      scores.push_back(similarity(q, encode_pooled(doc_table, state.params.normalize, p).output));
    }
    const auto w = relevance_weights(scores, cfg.loss.weight_floor);
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (is_cross_topic(label->second, group->span_offsets[0], group->span_offsets[j + 1])) {
        cross += w[j];
        ++out.cross_topic_pairs;
      } else {
        same += w[j];
        ++out.same_topic_pairs;
      }
    }
  }
  if (out.same_topic_pairs > 0) out.same_topic_mean = same / static_cast<double>(out.same_topic_pairs);
  if (out.cross_topic_pairs > 0) {
    out.cross_topic_mean = cross / static_cast<double>(out.cross_topic_pairs);
  }
  return out;
}

}  // namespace recon
