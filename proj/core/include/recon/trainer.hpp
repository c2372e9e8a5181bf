#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recon/augment.hpp"
#include "recon/corpus.hpp"
#include "recon/encoder.hpp"
#include "recon/loss.hpp"
#include "recon/negatives.hpp"
#include "recon/synthetic.hpp"

namespace recon {

enum class OptimizerKind { sgd, adam };

OptimizerKind parse_optimizer(std::string_view text);
std::string_view to_string(OptimizerKind kind);

struct TrainConfig {
  std::size_t total_steps = 2000;
  std::size_t warmup_steps = 200;
  double peak_lr = 0.05;
  std::size_t batch_groups = 16;
  CropConfig crop;  ///< crop.pairs is the number of positive pairs per document
  LossConfig loss;
  NegativesMode negatives = NegativesMode::moco;
  std::size_t queue_capacity = 4096;
  double mu = 0.99;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 500;

  std::uint32_t vocab_size = kDefaultVocabSize;
  std::size_t dim = 64;
  bool normalize = true;
  double init_scale = 0.05;

  OptimizerKind optimizer = OptimizerKind::sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

/// Linear warmup from 0 to peak_lr over warmup_steps, then linear decay to 0
/// at total_steps. Throws ConfigError for step >= total_steps.
double lr_at(std::size_t step, const TrainConfig& cfg);

struct AdamState {
  Matrix first_moment;
  Matrix second_moment;
  std::uint64_t updates = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Everything that evolves during training. Together with the config and the
/// corpus it determines the rest of a run.
struct TrainState {
  EncoderParams params;
  std::optional<MomentumState> momentum;
  NegativeQueue queue;
  std::optional<AdamState> adam;
  std::uint64_t step = 0;

  friend bool operator==(const TrainState&, const TrainState&) = default;
};

TrainState init_state(const TrainConfig& cfg);

struct TrainingDoc {
  std::string id;
  TokenSeq tokens;
};

std::vector<TrainingDoc> prepare_corpus(std::span<const Document> docs, std::uint32_t vocab_size);

struct StepMetrics {
  std::uint64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  double w_mean = 0.0;
  double w_min = 0.0;
  double w_max = 0.0;
  std::optional<double> w_cross_topic;
  std::optional<double> w_same_topic;
  std::size_t groups = 0;
  std::size_t skipped = 0;
  /// Sum of weights of each group; 1 for uniform and relevance_doc.
  std::vector<double> group_weight_sums;
};

/// One JSON object per line with the fields of StepMetrics that are logged.
std::string metrics_json(const StepMetrics& metrics);

/// Crops every batch document into a positive group, evaluates the configured
/// loss, applies one optimizer step at lr_at(state.step) and, in moco mode,
/// updates the momentum table and enqueues the momentum-encoded positives.
StepMetrics train_step(TrainState& state, std::span<const TrainingDoc* const> batch,
                       const TrainConfig& cfg, const LabelMap* labels = nullptr);

/// Document indices of the batch at `step`: one seeded permutation per epoch,
/// partial last batch dropped.
std::vector<std::size_t> batch_indices(std::size_t step, std::size_t corpus_size,
                                       const TrainConfig& cfg);

struct PretrainOptions {
  const LabelMap* labels = nullptr;
  std::ostream* metrics_log = nullptr;
  /// Periodic checkpoints go to "<checkpoint_path>.step-<k>" when non-empty.
  std::filesystem::path checkpoint_path;
  std::function<void(const StepMetrics&)> on_step;
};

/// Runs train_step from state.step up to cfg.total_steps.
void train_until_done(TrainState& state, std::span<const TrainingDoc> corpus,
                      const TrainConfig& cfg, const PretrainOptions& options = {});

TrainState pretrain(std::span<const Document> corpus, const TrainConfig& cfg,
                    const PretrainOptions& options = {});

/// Restarts the schedule at step 0 from loaded weights with a fresh queue
/// and optimizer state.
TrainState continue_pretrain(const TrainState& loaded, std::span<const Document> target_corpus,
                             const TrainConfig& cfg, const PretrainOptions& options = {});

/// Mean relevance weight of same-topic versus cross-topic pairs under the
/// current model, one group per croppable labeled document.
struct WeightDiagnostics {
  double same_topic_mean = 0.0;
  double cross_topic_mean = 0.0;
  std::size_t same_topic_pairs = 0;
  std::size_t cross_topic_pairs = 0;
};

WeightDiagnostics relevance_diagnostics(const TrainState& state,
                                        std::span<const TrainingDoc> corpus,
                                        const LabelMap& labels, const TrainConfig& cfg,
                                        std::uint64_t seed);

/// True when the query span and positive span of a labeled document have
/// different majority topics.
bool is_cross_topic(const DocLabel& label, const Span& query, const Span& positive);

}  // namespace recon
