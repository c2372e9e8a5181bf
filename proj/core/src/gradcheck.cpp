#include "recon/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recon/rng.hpp"

namespace recon {

GradcheckInstance make_gradcheck_instance(const GradcheckShape& shape) {
  GradcheckInstance inst;
  inst.params = EncoderParams::initialize(shape.vocab_size, shape.dim, shape.seed, true, 0.5);
  Rng rng(mix_seed(shape.seed, 0x6c4ec));

  inst.momentum = MomentumState::copy_of(inst.params, 0.99);
  for (double& v : inst.momentum.table.values()) v += rng.uniform(-0.1, 0.1);

  CropConfig crop;
  crop.pairs = shape.pairs;
  crop.min_ratio = 0.2;
  crop.max_ratio = 0.6;
  crop.min_span_tokens = 2;
  const auto vocab = static_cast<std::uint32_t>(shape.vocab_size);
  while (inst.groups.size() < shape.groups) {
    TokenSeq doc{{}, vocab};
    const auto len = static_cast<std::size_t>(rng.uniform_int(12, 20));
    for (std::size_t i = 0; i < len; ++i) doc.tokens.push_back(static_cast<TokenId>(rng.uniform_index(vocab)));
    auto group = make_group("doc-" + std::to_string(inst.groups.size()), doc, crop, rng);
    if (group) inst.groups.push_back(std::move(*group));
  }

  inst.queue = NegativeQueue(std::max<std::size_t>(1, shape.queue_entries), shape.dim);
  std::vector<Embedding> entries;
  for (std::size_t k = 0; k < shape.queue_entries; ++k) {
    Embedding e(shape.dim);
    double norm = 0.0;
    for (double& v : e) {
      v = rng.uniform(-1.0, 1.0);
      norm += v * v;
    }
    for (double& v : e) v /= std::sqrt(norm);
    entries.push_back(std::move(e));
  }
  inst.queue.enqueue(entries);
  return inst;
}

}  // namespace recon
