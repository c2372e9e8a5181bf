// recon: relevance-aware contrastive pre-training workflow.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "recon/bm25.hpp"
#include "recon/checkpoint.hpp"
#include "recon/corpus.hpp"
#include "recon/dense_index.hpp"
#include "recon/error.hpp"
#include "recon/fewshot.hpp"
#include "recon/gradcheck.hpp"
#include "recon/metrics.hpp"
#include "recon/objective.hpp"
#include "recon/stats.hpp"
#include "recon/synthetic.hpp"
#include "recon/train_config.hpp"
#include "recon/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

// Peak learning rate of continue-pretrain unless set explicitly.
constexpr double kContinuePeakLr = 0.01;
constexpr std::size_t kContinueSteps = 500;
constexpr std::size_t kContinueWarmup = 50;

/// Flags that override TrainConfig keys, kept as text and applied through the
/// same parser as the config file.
struct TrainOverrides {
  std::map<std::string, std::string> values;

  void add(CLI::App* cmd, const std::string& flag, const std::string& key,
           const std::string& help, const std::string& default_text) {
    cmd->add_option_function<std::string>(
           flag, [this, key](const std::string& v) { values[key] = v; }, help)
        ->default_str(default_text);
  }

  void apply(recon::TrainConfig& train, recon::FewshotConfig& fewshot) const {
    for (const auto& [key, value] : values) recon::apply_setting(key, value, train, fewshot);
  }
};

std::string num(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

void add_train_overrides(CLI::App* cmd, TrainOverrides& o, const recon::TrainConfig& d) {
  o.add(cmd, "--mode", "mode", "Loss mode: uniform | relevance_doc | relevance_batch",
        std::string(recon::to_string(d.loss.mode)));
  o.add(cmd, "--pairs", "pairs_per_doc", "Positive pairs per document", std::to_string(d.crop.pairs));
  o.add(cmd, "--negatives", "negatives_mode", "Negatives: moco | in_batch",
        std::string(recon::to_string(d.negatives)));
  o.add(cmd, "--steps", "total_steps", "Total optimizer steps", std::to_string(d.total_steps));
  o.add(cmd, "--warmup", "warmup_steps", "Linear warmup steps", std::to_string(d.warmup_steps));
  o.add(cmd, "--lr", "peak_lr", "Peak learning rate", num(d.peak_lr));
  o.add(cmd, "--tau", "tau", "InfoNCE temperature", num(d.loss.tau));
  o.add(cmd, "--batch", "batch_groups", "Documents per batch", std::to_string(d.batch_groups));
  o.add(cmd, "--queue", "queue_capacity", "Negative queue capacity", std::to_string(d.queue_capacity));
  o.add(cmd, "--momentum", "mu", "Momentum coefficient", num(d.mu));
  o.add(cmd, "--dim", "dim", "Embedding dimension", std::to_string(d.dim));
  o.add(cmd, "--vocab-size", "vocab_size", "Hashing vocabulary size", std::to_string(d.vocab_size));
  o.add(cmd, "--optimizer", "optimizer", "Optimizer: sgd | adam", std::string(recon::to_string(d.optimizer)));
  o.add(cmd, "--checkpoint-every", "checkpoint_every", "Steps between periodic checkpoints",
        std::to_string(d.checkpoint_every));
  o.add(cmd, "--seed", "seed", "Random seed", std::to_string(d.seed));
}

std::vector<recon::Document> read_corpus(const fs::path& path) { return recon::ingest_jsonl(path); }

void write_json(const json& report, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << report.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw recon::IoError("cannot write " + out);
  f << report.dump(2) << '\n';
}

json metric_json(const recon::MetricResult& r) {
  return json{{"mean", r.mean}, {"per_query", r.per_query}};
}

recon::RankedRun dense_run_for(const fs::path& checkpoint, const fs::path& corpus_path,
                               const fs::path& index_path, const fs::path& queries_path,
                               std::size_t k) {
  const auto state = recon::load_checkpoint(checkpoint);
  recon::DenseIndex index = index_path.empty()
                                ? recon::build_index(state.params, read_corpus(corpus_path))
                                : recon::load_index(index_path);
  return recon::dense_run(state.params, index, read_corpus(queries_path), k);
}

recon::RankedRun bm25_run_for(const fs::path& corpus_path, const fs::path& queries_path,
                              std::uint32_t vocab_size, std::size_t k) {
  const auto corpus = read_corpus(corpus_path);
  std::vector<std::string> ids;
  for (const auto& d : corpus) ids.push_back(d.id);
  recon::Bm25Index bm25(std::move(ids), recon::tokenize_corpus(corpus, vocab_size));
  recon::RankedRun run;
  for (const auto& q : read_corpus(queries_path)) {
    run[q.id] = bm25.search(recon::tokenize(q.text, vocab_size).tokens, k);
  }
  return run;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_pattern("[%l] %v");
  CLI::App app{"recon: relevance-aware contrastive pre-training for dense retrieval"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  const recon::TrainConfig defaults;
  const recon::FewshotConfig fewshot_defaults;

  // gen-synthetic
  recon::SyntheticSpec syn;
  std::string syn_out;
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a corpus with planted topic mixtures");
  gen->add_option("--topics", syn.num_topics, "Number of topics")->capture_default_str();
  gen->add_option("--docs-per-topic", syn.docs_per_topic, "Documents per topic")->capture_default_str();
  gen->add_option("--mixed", syn.mixed_fraction, "Fraction of two-topic documents")->capture_default_str();
  gen->add_option("--tokens-per-doc", syn.tokens_per_doc, "Tokens per document")->capture_default_str();
  gen->add_option("--vocab-per-topic", syn.vocab_per_topic, "Words per topic")->capture_default_str();
  gen->add_option("--queries-per-topic", syn.queries_per_topic, "Queries per topic")->capture_default_str();
  gen->add_option("--query-tokens", syn.query_tokens, "Tokens per query")->capture_default_str();
  gen->add_option("--vocab-size", syn.vocab_size, "Hashing vocabulary size")->capture_default_str();
  gen->add_option("--seed", syn.seed, "Random seed")->capture_default_str();
  gen->add_option("--out", syn_out, "Output directory")->required();

  // pretrain
  std::string pt_corpus, pt_config, pt_out, pt_labels, pt_metrics, pt_resume;
  TrainOverrides pt_over;
  auto* pre = app.add_subcommand("pretrain", "Contrastive pre-training from scratch");
  pre->add_option("--corpus", pt_corpus, "Corpus JSONL")->required();
  pre->add_option("--config", pt_config, "key = value config file");
  pre->add_option("--out", pt_out, "Final checkpoint path")->required();
  pre->add_option("--labels", pt_labels, "Synthetic labels TSV for cross-topic weight metrics");
  pre->add_option("--metrics", pt_metrics, "Per-step metrics JSONL");
  pre->add_option("--resume", pt_resume, "Resume from a checkpoint written by this run");
  add_train_overrides(pre, pt_over, defaults);

  // continue-pretrain
  std::string cp_ckpt, cp_corpus, cp_config, cp_out, cp_labels, cp_metrics;
  TrainOverrides cp_over;
  recon::TrainConfig cp_defaults = defaults;
  cp_defaults.peak_lr = kContinuePeakLr;
  cp_defaults.total_steps = kContinueSteps;
  cp_defaults.warmup_steps = kContinueWarmup;
  auto* cont = app.add_subcommand("continue-pretrain", "Further pre-training on a target corpus");
  cont->add_option("--checkpoint", cp_ckpt, "Starting checkpoint")->required();
  cont->add_option("--corpus", cp_corpus, "Target corpus JSONL")->required();
  cont->add_option("--config", cp_config, "key = value config file");
  cont->add_option("--out", cp_out, "Output checkpoint")->required();
  cont->add_option("--labels", cp_labels, "Synthetic labels TSV");
  cont->add_option("--metrics", cp_metrics, "Per-step metrics JSONL");
  add_train_overrides(cont, cp_over, cp_defaults);

  // fewshot
  std::string fs_ckpt, fs_corpus, fs_examples, fs_out, fs_config;
  recon::FewshotConfig fs_cfg;
  auto* few = app.add_subcommand("fewshot", "Supervised fine-tuning with BM25 negatives");
  few->add_option("--checkpoint", fs_ckpt, "Starting checkpoint")->required();
  few->add_option("--corpus", fs_corpus, "Corpus JSONL")->required();
  few->add_option("--examples", fs_examples, "Labeled examples JSONL {query_id, query, positive}");
  few->add_option("--config", fs_config, "key = value config file (fewshot_* keys)");
  few->add_option("--out", fs_out, "Output checkpoint")->required();
  few->add_option("--negatives-per-query", fs_cfg.negatives_per_query, "BM25 negatives per query")
      ->capture_default_str();
  few->add_option("--epochs", fs_cfg.epochs, "Training epochs")->capture_default_str();
  few->add_option("--batch-size", fs_cfg.batch_size, "Queries per batch")->capture_default_str();
  few->add_option("--lr", fs_cfg.lr, "Learning rate")->capture_default_str();
  few->add_option("--tau", fs_cfg.tau, "InfoNCE temperature")->capture_default_str();
  few->add_option("--seed", fs_cfg.seed, "Random seed")->capture_default_str();

  // index
  std::string ix_ckpt, ix_corpus, ix_out;
  auto* idx = app.add_subcommand("index", "Encode a corpus into a dense index");
  idx->add_option("--checkpoint", ix_ckpt, "Checkpoint")->required();
  idx->add_option("--corpus", ix_corpus, "Corpus JSONL")->required();
  idx->add_option("--out", ix_out, "Index file")->required();

  // search
  std::string se_ckpt, se_corpus, se_index, se_queries, se_out, se_tag = "recon";
  std::size_t se_k = 100;
  std::uint32_t se_vocab = recon::kDefaultVocabSize;
  bool se_bm25 = false;
  auto* sea = app.add_subcommand("search", "Retrieve for a query file and write a TREC run");
  sea->add_option("--checkpoint", se_ckpt, "Checkpoint (dense retrieval)");
  sea->add_option("--corpus", se_corpus, "Corpus JSONL (indexed on the fly or for BM25)");
  sea->add_option("--index", se_index, "Prebuilt dense index");
  sea->add_option("--queries", se_queries, "Queries JSONL")->required();
  sea->add_option("--out", se_out, "Output TREC run")->required();
  sea->add_option("--k", se_k, "Results per query")->capture_default_str();
  sea->add_option("--tag", se_tag, "Run tag")->capture_default_str();
  sea->add_flag("--bm25", se_bm25, "Lexical BM25 retrieval instead of dense");
  sea->add_option("--vocab-size", se_vocab, "Hashing vocabulary size for --bm25")->capture_default_str();

  // evaluate
  std::string ev_run, ev_ckpt, ev_corpus, ev_queries, ev_qrels, ev_out;
  std::vector<std::string> ev_metrics{"ndcg@10", "recall@5", "recall@20", "recall@100"};
  auto* eva = app.add_subcommand("evaluate", "Score a run (or a checkpoint) against qrels");
  eva->add_option("--run", ev_run, "TREC run file");
  eva->add_option("--checkpoint", ev_ckpt, "Checkpoint; the dense run is computed");
  eva->add_option("--corpus", ev_corpus, "Corpus JSONL (with --checkpoint)");
  eva->add_option("--queries", ev_queries, "Queries JSONL (with --checkpoint)");
  eva->add_option("--qrels", ev_qrels, "Qrels TSV")->required();
  eva->add_option("--metric", ev_metrics, "Metrics such as ndcg@10, recall@20")->capture_default_str();
  eva->add_option("--out", ev_out, "Report JSON (stdout when omitted)");

  // compare
  std::string cm_a, cm_b, cm_qrels, cm_metric = "ndcg@10", cm_out;
  auto* cmp = app.add_subcommand("compare", "Paired t-test between two runs");
  cmp->add_option("--run-a", cm_a, "First TREC run")->required();
  cmp->add_option("--run-b", cm_b, "Second TREC run")->required();
  cmp->add_option("--qrels", cm_qrels, "Qrels TSV")->required();
  cmp->add_option("--metric", cm_metric, "Per-query metric to test")->capture_default_str();
  cmp->add_option("--out", cm_out, "Report JSON (stdout when omitted)");

  // gradcheck
  recon::GradcheckShape gc;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  std::string gc_mode = "all", gc_neg = "all";
  auto* grc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  grc->add_option("--vocab-size", gc.vocab_size, "Vocabulary size")->capture_default_str();
  grc->add_option("--dim", gc.dim, "Embedding dimension")->capture_default_str();
  grc->add_option("--groups", gc.groups, "Documents in the batch")->capture_default_str();
  grc->add_option("--pairs", gc.pairs, "Positive pairs per document")->capture_default_str();
  grc->add_option("--mode", gc_mode, "Loss mode or all")->capture_default_str();
  grc->add_option("--negatives", gc_neg, "Negatives mode or all")->capture_default_str();
  grc->add_option("--eps", gc_eps, "Finite-difference step")->capture_default_str();
  grc->add_option("--tolerance", gc_tol, "Failure threshold on max relative error")->capture_default_str();
  grc->add_option("--seed", gc.seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  } catch (const recon::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*gen) {
      auto corpus = recon::gen_synthetic(syn);
      fs::create_directories(syn_out);
      const fs::path dir(syn_out);
      recon::write_jsonl(dir / "corpus.jsonl", corpus.corpus);
      recon::write_jsonl(dir / "queries.jsonl", corpus.queries);
      recon::write_qrels(dir / "qrels.tsv", corpus.qrels);
      recon::write_labels_tsv(dir / "labels.tsv", corpus.labels);
      spdlog::info("wrote {} documents and {} queries to {}", corpus.corpus.size(),
                   corpus.queries.size(), syn_out);
    } else if (*pre || *cont) {
      const bool is_cont = cont->parsed();
      recon::TrainConfig cfg = is_cont ? cp_defaults : defaults;
      recon::FewshotConfig unused;
      const std::string& config = is_cont ? cp_config : pt_config;
      if (!config.empty()) recon::apply_config_file(config, cfg, unused);
      (is_cont ? cp_over : pt_over).apply(cfg, unused);
      std::optional<recon::TrainState> loaded;
      if (is_cont) {
        loaded = recon::load_checkpoint(cp_ckpt);
        cfg.vocab_size = static_cast<std::uint32_t>(loaded->params.vocab_size());
        cfg.dim = loaded->params.dim();
      }
      cfg.validate();
      const auto docs = read_corpus(is_cont ? cp_corpus : pt_corpus);
      recon::LabelMap labels;
      const std::string& labels_path = is_cont ? cp_labels : pt_labels;
      if (!labels_path.empty()) labels = recon::read_labels_tsv(labels_path);
      std::ofstream metrics_file;
      const std::string& metrics_path = is_cont ? cp_metrics : pt_metrics;
      recon::PretrainOptions opts;
      if (!metrics_path.empty()) {
        metrics_file.open(metrics_path, std::ios::app);
        if (!metrics_file) throw recon::IoError("cannot write " + metrics_path);
        opts.metrics_log = &metrics_file;
      }
      if (!labels.empty()) opts.labels = &labels;
      const std::string& out = is_cont ? cp_out : pt_out;
      opts.checkpoint_path = out;
      recon::TrainState state;
      if (is_cont) {
        state = recon::continue_pretrain(*loaded, docs, cfg, opts);
      } else if (!pt_resume.empty()) {
        state = recon::load_checkpoint(pt_resume);
        recon::train_until_done(state, recon::prepare_corpus(docs, cfg.vocab_size), cfg, opts);
      } else {
        state = recon::pretrain(docs, cfg, opts);
      }
      recon::save_checkpoint(out, state);
      spdlog::info("wrote checkpoint {} at step {}", out, state.step);
    } else if (*few) {
      if (!fs_config.empty()) {
        recon::TrainConfig unused;
        recon::FewshotConfig from_file = fs_cfg;
        recon::apply_config_file(fs_config, unused, from_file);
        const auto flags = fs_cfg;
        fs_cfg = from_file;
        // Explicit flags win over the file.
        if (few->count("--negatives-per-query")) fs_cfg.negatives_per_query = flags.negatives_per_query;
        if (few->count("--epochs")) fs_cfg.epochs = flags.epochs;
        if (few->count("--batch-size")) fs_cfg.batch_size = flags.batch_size;
        if (few->count("--lr")) fs_cfg.lr = flags.lr;
        if (few->count("--tau")) fs_cfg.tau = flags.tau;
        if (few->count("--seed")) fs_cfg.seed = flags.seed;
      }
      if (!fs_examples.empty()) fs_cfg.examples = recon::read_labeled_examples(fs_examples);
      if (fs_cfg.examples.empty()) throw recon::ConfigError("no labeled examples given");
      auto state = recon::load_checkpoint(fs_ckpt);
      const auto docs = read_corpus(fs_corpus);
      const auto vocab = static_cast<std::uint32_t>(state.params.vocab_size());
      std::vector<std::string> ids;
      for (const auto& d : docs) ids.push_back(d.id);
      recon::Bm25Index bm25(std::move(ids), recon::tokenize_corpus(docs, vocab));
      state.params = recon::fewshot_finetune(state.params, docs, fs_cfg, bm25);
      recon::save_checkpoint(fs_out, state);
      spdlog::info("wrote fine-tuned checkpoint {}", fs_out);
    } else if (*idx) {
      const auto state = recon::load_checkpoint(ix_ckpt);
      recon::save_index(ix_out, recon::build_index(state.params, read_corpus(ix_corpus)));
    } else if (*sea) {
      recon::RankedRun run;
      if (se_bm25) {
        if (se_corpus.empty()) throw recon::ConfigError("--bm25 needs --corpus");
        run = bm25_run_for(se_corpus, se_queries, se_vocab, se_k);
      } else {
        if (se_ckpt.empty() || (se_corpus.empty() && se_index.empty())) {
          std::cerr << "usage error: dense search needs --checkpoint and --corpus or --index\n";
          return kUsageError;
        }
        run = dense_run_for(se_ckpt, se_corpus, se_index, se_queries, se_k);
      }
      recon::write_trec_run(se_out, run, se_tag);
    } else if (*eva) {
      recon::RankedRun run;
      if (!ev_run.empty()) {
        run = recon::read_trec_run(ev_run);
      } else if (!ev_ckpt.empty() && !ev_corpus.empty() && !ev_queries.empty()) {
        run = dense_run_for(ev_ckpt, ev_corpus, {}, ev_queries, 1000);
      } else {
        std::cerr << "usage error: evaluate needs --run or --checkpoint, --corpus and --queries\n";
        return kUsageError;
      }
      const auto qrels = recon::read_qrels(ev_qrels);
      run = recon::restrict_to_judged(run, qrels);
      json report{{"queries", run.size()}, {"source", ev_run.empty() ? ev_ckpt : ev_run}};
      for (const auto& m : ev_metrics) {
        const auto spec = recon::parse_metric(m);
        report["metrics"][spec.name()] = metric_json(recon::evaluate_metric(run, qrels, spec));
      }
      write_json(report, ev_out);
    } else if (*cmp) {
      const auto qrels = recon::read_qrels(cm_qrels);
      const auto spec = recon::parse_metric(cm_metric);
      const auto ra = recon::evaluate_metric(recon::restrict_to_judged(recon::read_trec_run(cm_a), qrels), qrels, spec);
      const auto rb = recon::evaluate_metric(recon::restrict_to_judged(recon::read_trec_run(cm_b), qrels), qrels, spec);
      // Queries absent from one run score 0 there.
      std::set<std::string> qids;
      for (const auto& [q, v] : ra.per_query) qids.insert(q);
      for (const auto& [q, v] : rb.per_query) qids.insert(q);
      std::vector<double> a, b;
      json per_query = json::object();
      for (const auto& q : qids) {
        a.push_back(ra.per_query.contains(q) ? ra.per_query.at(q) : 0.0);
        b.push_back(rb.per_query.contains(q) ? rb.per_query.at(q) : 0.0);
        per_query[q] = {a.back(), b.back()};
      }
      const auto test = recon::paired_t_test(a, b);
      json report{{"metric", spec.name()}, {"queries", qids.size()},
                  {"mean_a", ra.mean},     {"mean_b", rb.mean},
                  {"t", test.t},           {"p", test.p},
                  {"significant", test.p < 0.05}, {"per_query", per_query}};
      write_json(report, cm_out);
    } else if (*grc) {
      std::vector<recon::LossMode> modes;
      std::vector<recon::NegativesMode> negs;
      if (gc_mode == "all") {
        modes = {recon::LossMode::uniform, recon::LossMode::relevance_doc, recon::LossMode::relevance_batch};
      } else {
        modes = {recon::parse_loss_mode(gc_mode)};
      }
      if (gc_neg == "all") {
        negs = {recon::NegativesMode::in_batch, recon::NegativesMode::moco};
      } else {
        negs = {recon::parse_negatives_mode(gc_neg)};
      }
      const auto inst = recon::make_gradcheck_instance(gc);
      bool ok = true;
      for (auto neg : negs) {
        for (auto mode : modes) {
          recon::LossConfig loss;
          loss.mode = mode;
          recon::GradientCheckOptions opts;
          opts.eps = gc_eps;
          opts.seed = gc.seed;
          const double err = recon::check_gradients(inst.params, inst.groups, loss, inst.source(neg), opts);
          ok = ok && err < gc_tol;
          std::cout << json{{"mode", recon::to_string(mode)}, {"negatives", recon::to_string(neg)},
                            {"max_rel_error", err}, {"pass", err < gc_tol}}.dump()
                    << '\n';
        }
      }
      return ok ? 0 : kRuntimeError;
    }
  } catch (const recon::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
