#include <sstream>

#include <gtest/gtest.h>

#include "recon/checkpoint.hpp"
#include "recon/error.hpp"
#include "recon/rng.hpp"
#include "test_util.hpp"

namespace recon {
namespace {

TrainState sample_state(bool momentum, bool adam) {
  TrainState s;
  s.params = EncoderParams::initialize(10, 3, 4, true, 1.0);
  if (momentum) s.momentum = MomentumState{EncoderParams::initialize(10, 3, 5).table, 0.97};
  s.queue = NegativeQueue(5, 3);
  const std::vector<Embedding> entries{{0.1, 0.2, 0.3}, {-1.0, 0.5, 1e-300}};
  s.queue.enqueue(entries);
  s.step = 1234;
  if (adam) {
    s.adam = AdamState{EncoderParams::initialize(10, 3, 6).table,
                       EncoderParams::initialize(10, 3, 7).table, 77};
  }
  return s;
}

TEST(Checkpoint, RoundTripsEveryVariant) {
  for (bool momentum : {false, true}) {
    for (bool adam : {false, true}) {
      const auto state = sample_state(momentum, adam);
      std::stringstream buf;
      write_checkpoint(buf, state);
      EXPECT_EQ(read_checkpoint(buf), state) << momentum << adam;
    }
  }
}

TEST(Checkpoint, FileRoundTrip) {
  test::TempDir dir;
  const auto state = sample_state(true, false);
  save_checkpoint(dir / "m.ckpt", state);
  EXPECT_EQ(load_checkpoint(dir / "m.ckpt"), state);
}

TEST(Checkpoint, HeaderLayout) {
  std::stringstream buf;
  write_checkpoint(buf, sample_state(false, false));
  const std::string bytes = buf.str();
  EXPECT_EQ(bytes.substr(0, 4), "RCTR");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), kCheckpointVersion);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 10);  // V, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 3);  // d
}

TEST(Checkpoint, ParametersOnlyFileLoads) {
  std::stringstream full;
  const auto state = sample_state(true, false);
  write_checkpoint(full, state);
  // magic + version + V + d + normalize + table + has_momentum + mu + momentum
  const std::size_t cut = 4 + 4 + 8 + 8 + 1 + 30 * 8 + 1 + 8 + 30 * 8;
  std::stringstream prefix(full.str().substr(0, cut));
  const auto loaded = read_checkpoint(prefix);
  EXPECT_EQ(loaded.params, state.params);
  EXPECT_EQ(loaded.momentum, state.momentum);
  EXPECT_EQ(loaded.step, 0u);
  EXPECT_TRUE(loaded.queue.empty());
}

TEST(Checkpoint, CorruptInputsRejected) {
  std::stringstream full;
  write_checkpoint(full, sample_state(true, true));
  const std::string bytes = full.str();

  std::stringstream bad_magic("XXXX" + bytes.substr(4));
  EXPECT_THROW(read_checkpoint(bad_magic), ParseError);

  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  std::stringstream v(wrong_version);
  EXPECT_THROW(read_checkpoint(v), ParseError);

  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto cut = 4 + rng.uniform_index(bytes.size() - 5);
    std::stringstream truncated(bytes.substr(0, cut));
    // Cutting exactly after the momentum block is the legal parameters-only form.
    if (cut == 4 + 4 + 8 + 8 + 1 + 30 * 8 + 1 + 8 + 30 * 8) continue;
    EXPECT_THROW(read_checkpoint(truncated), ParseError) << "cut at " << cut;
  }
}

TEST(Checkpoint, IoErrorsCarryPath) {
  try {
    load_checkpoint("/nonexistent/dir/model.ckpt");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/model.ckpt"), std::string::npos);
  }
  EXPECT_THROW(save_checkpoint("/nonexistent/dir/model.ckpt", sample_state(false, false)), IoError);
  test::TempDir dir;
  test::write_file(dir / "junk.ckpt", "not a checkpoint at all");
  try {
    load_checkpoint(dir / "junk.ckpt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("junk.ckpt"), std::string::npos);
  }
}

}  // namespace
}  // namespace recon
