#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "recon/augment.hpp"
#include "recon/encoder.hpp"
#include "recon/negatives.hpp"
#include "recon/objective.hpp"

namespace recon {

/// A small random batch with everything needed to evaluate the loss in
/// either negatives mode.
struct GradcheckInstance {
  EncoderParams params;
  std::vector<PositiveGroup> groups;
  NegativeQueue queue;
  MomentumState momentum;

  NegativeSource source(NegativesMode mode) const {
    return {mode, &queue, &momentum.table};
  }
};

struct GradcheckShape {
  std::size_t vocab_size = 64;
  std::size_t dim = 8;
  std::size_t groups = 2;
  std::size_t pairs = 4;
  std::size_t queue_entries = 32;
  std::uint64_t seed = 0;
};

/// Random table (entries in [-0.5, 0.5]), random documents cropped into
/// groups, a queue of random unit vectors and a perturbed momentum copy.
GradcheckInstance make_gradcheck_instance(const GradcheckShape& shape);

}  // namespace recon
