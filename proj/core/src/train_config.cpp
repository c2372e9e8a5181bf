#include "recon/train_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "recon/error.hpp"

namespace recon {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key " + std::string(key) + ": expected an integer, got \"" +
                      std::string(value) + "\"");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string text(value);
    const double out = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key " + std::string(key) + ": expected a number, got \"" +
                      std::string(value) + "\"");
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key " + std::string(key) + ": expected true or false");
}

std::string real_text(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

struct Key {
  const char* name;
  std::function<void(std::string_view, TrainConfig&, FewshotConfig&)> set;
  std::function<std::string(const TrainConfig&, const FewshotConfig&)> get;
};

template <class Field>
Key size_key(const char* name, Field field) {
  return {name,
          [name, field](std::string_view v, TrainConfig& t, FewshotConfig& f) {
            field(t, f) = parse_integer<std::size_t>(name, v);
          },
          [field](const TrainConfig& t, const FewshotConfig& f) {
            return std::to_string(field(const_cast<TrainConfig&>(t), const_cast<FewshotConfig&>(f)));
          }};
}

template <class Field>
Key real_key(const char* name, Field field) {
  return {name,
          [name, field](std::string_view v, TrainConfig& t, FewshotConfig& f) {
            field(t, f) = parse_real(name, v);
          },
          [field](const TrainConfig& t, const FewshotConfig& f) {
            return real_text(field(const_cast<TrainConfig&>(t), const_cast<FewshotConfig&>(f)));
          }};
}

const std::vector<Key>& keys() {
  using T = TrainConfig;
  using F = FewshotConfig;
  static const std::vector<Key> table = {
      size_key("total_steps", [](T& t, F&) -> std::size_t& { return t.total_steps; }),
      size_key("warmup_steps", [](T& t, F&) -> std::size_t& { return t.warmup_steps; }),
      real_key("peak_lr", [](T& t, F&) -> double& { return t.peak_lr; }),
      size_key("batch_groups", [](T& t, F&) -> std::size_t& { return t.batch_groups; }),
      size_key("pairs_per_doc", [](T& t, F&) -> std::size_t& { return t.crop.pairs; }),
      real_key("min_ratio", [](T& t, F&) -> double& { return t.crop.min_ratio; }),
      real_key("max_ratio", [](T& t, F&) -> double& { return t.crop.max_ratio; }),
      size_key("min_span_tokens", [](T& t, F&) -> std::size_t& { return t.crop.min_span_tokens; }),
      real_key("tau", [](T& t, F&) -> double& { return t.loss.tau; }),
      {"mode", [](std::string_view v, T& t, F&) { t.loss.mode = parse_loss_mode(v); },
       [](const T& t, const F&) { return std::string(to_string(t.loss.mode)); }},
      real_key("weight_floor", [](T& t, F&) -> double& { return t.loss.weight_floor; }),
      {"detach_weights",
       [](std::string_view v, T& t, F&) { t.loss.detach_weights = parse_bool("detach_weights", v); },
       [](const T& t, const F&) { return std::string(t.loss.detach_weights ? "true" : "false"); }},
      {"negatives_mode", [](std::string_view v, T& t, F&) { t.negatives = parse_negatives_mode(v); },
       [](const T& t, const F&) { return std::string(to_string(t.negatives)); }},
      size_key("queue_capacity", [](T& t, F&) -> std::size_t& { return t.queue_capacity; }),
      real_key("mu", [](T& t, F&) -> double& { return t.mu; }),
      {"seed",
       [](std::string_view v, T& t, F&) { t.seed = parse_integer<std::uint64_t>("seed", v); },
       [](const T& t, const F&) { return std::to_string(t.seed); }},
      size_key("checkpoint_every", [](T& t, F&) -> std::size_t& { return t.checkpoint_every; }),
      {"vocab_size",
       [](std::string_view v, T& t, F&) { t.vocab_size = parse_integer<std::uint32_t>("vocab_size", v); },
       [](const T& t, const F&) { return std::to_string(t.vocab_size); }},
      size_key("dim", [](T& t, F&) -> std::size_t& { return t.dim; }),
      {"normalize", [](std::string_view v, T& t, F&) { t.normalize = parse_bool("normalize", v); },
       [](const T& t, const F&) { return std::string(t.normalize ? "true" : "false"); }},
      real_key("init_scale", [](T& t, F&) -> double& { return t.init_scale; }),
      {"optimizer", [](std::string_view v, T& t, F&) { t.optimizer = parse_optimizer(v); },
       [](const T& t, const F&) { return std::string(to_string(t.optimizer)); }},
      real_key("adam_beta1", [](T& t, F&) -> double& { return t.adam_beta1; }),
      real_key("adam_beta2", [](T& t, F&) -> double& { return t.adam_beta2; }),
      real_key("adam_eps", [](T& t, F&) -> double& { return t.adam_eps; }),
      {"fewshot_examples",
       [](std::string_view v, T&, F& f) { f.examples = read_labeled_examples(std::string(v)); },
       [](const T&, const F& f) { return std::to_string(f.examples.size()) + " loaded"; }},
      size_key("fewshot_negatives_per_query",
               [](T&, F& f) -> std::size_t& { return f.negatives_per_query; }),
      size_key("fewshot_epochs", [](T&, F& f) -> std::size_t& { return f.epochs; }),
      size_key("fewshot_batch_size", [](T&, F& f) -> std::size_t& { return f.batch_size; }),
      real_key("fewshot_lr", [](T&, F& f) -> double& { return f.lr; }),
      real_key("fewshot_tau", [](T&, F& f) -> double& { return f.tau; }),
      {"fewshot_seed",
       [](std::string_view v, T&, F& f) { f.seed = parse_integer<std::uint64_t>("fewshot_seed", v); },
       [](const T&, const F& f) { return std::to_string(f.seed); }},
  };
  return table;
}

}  // namespace

void apply_setting(std::string_view key, std::string_view value, TrainConfig& train,
                   FewshotConfig& fewshot) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(value, train, fewshot);
      return;
    }
  }
  throw ConfigError("unknown config key \"" + std::string(key) + "\"");
}

void apply_config(std::istream& in, TrainConfig& train, FewshotConfig& fewshot) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected `key = value`", line_no);
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    try {
      apply_setting(key, value, train, fewshot);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

void apply_config_file(const std::filesystem::path& path, TrainConfig& train,
                       FewshotConfig& fewshot) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  try {
    apply_config(in, train, fewshot);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

std::string render_config(const TrainConfig& train, const FewshotConfig& fewshot) {
  std::string out;
  for (const auto& k : keys()) {
    // Examples come from a file path that is not kept, so only report the count.
    const bool comment = std::string_view(k.name) == "fewshot_examples";
    out += (comment ? "# " : "") + std::string(k.name) + " = " + k.get(train, fewshot) + "\n";
  }
  return out;
}

}  // namespace recon
