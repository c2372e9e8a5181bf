#include <sstream>

#include <gtest/gtest.h>

#include "recon/error.hpp"
#include "recon/train_config.hpp"
#include "test_util.hpp"

namespace recon {
namespace {

TEST(Config, AppliesTrainAndFewshotKeys) {
  TrainConfig t;
  FewshotConfig f;
  std::istringstream in(
      "# desk run\n"
      "total_steps = 300\n"
      "warmup_steps=30\n"
      "  peak_lr = 0.02   # inline comment\n"
      "\n"
      "pairs_per_doc = 2\n"
      "mode = relevance_batch\n"
      "negatives_mode = in_batch\n"
      "tau = 0.1\n"
      "detach_weights = false\n"
      "optimizer = adam\n"
      "seed = 42\n"
      "fewshot_epochs = 3\n"
      "fewshot_lr = 0.5\n");
  apply_config(in, t, f);
  EXPECT_EQ(t.total_steps, 300u);
  EXPECT_EQ(t.warmup_steps, 30u);
  EXPECT_DOUBLE_EQ(t.peak_lr, 0.02);
  EXPECT_EQ(t.crop.pairs, 2u);
  EXPECT_EQ(t.loss.mode, LossMode::relevance_batch);
  EXPECT_EQ(t.negatives, NegativesMode::in_batch);
  EXPECT_DOUBLE_EQ(t.loss.tau, 0.1);
  EXPECT_FALSE(t.loss.detach_weights);
  EXPECT_EQ(t.optimizer, OptimizerKind::adam);
  EXPECT_EQ(t.seed, 42u);
  EXPECT_EQ(f.epochs, 3u);
  EXPECT_DOUBLE_EQ(f.lr, 0.5);
}

TEST(Config, UnknownKeyIsError) {
  TrainConfig t;
  FewshotConfig f;
  std::istringstream in("total_steps = 5\nlearning_rate = 0.1\n");
  try {
    apply_config(in, t, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
  }
}

TEST(Config, BadValuesRejected) {
  TrainConfig t;
  FewshotConfig f;
  EXPECT_THROW(apply_setting("total_steps", "ten", t, f), ConfigError);
  EXPECT_THROW(apply_setting("total_steps", "-3", t, f), ConfigError);
  EXPECT_THROW(apply_setting("tau", "0.1x", t, f), ConfigError);
  EXPECT_THROW(apply_setting("mode", "weighted", t, f), ConfigError);
  EXPECT_THROW(apply_setting("normalize", "maybe", t, f), ConfigError);
  std::istringstream missing_eq("total_steps 5\n");
  EXPECT_THROW(apply_config(missing_eq, t, f), Error);
}

TEST(Config, RenderedConfigRoundTrips) {
  TrainConfig t;
  FewshotConfig f;
  t.peak_lr = 0.0123456789;
  t.loss.mode = LossMode::uniform;
  t.queue_capacity = 77;
  f.negatives_per_query = 3;
  const std::string text = render_config(t, f);
  TrainConfig t2;
  FewshotConfig f2;
  std::istringstream in(text);
  apply_config(in, t2, f2);
  EXPECT_EQ(render_config(t2, f2), text);
  EXPECT_DOUBLE_EQ(t2.peak_lr, t.peak_lr);
  EXPECT_EQ(t2.loss.mode, LossMode::uniform);
  EXPECT_EQ(f2.negatives_per_query, 3u);
}

TEST(Config, MissingFileIsIoError) {
  TrainConfig t;
  FewshotConfig f;
  EXPECT_THROW(apply_config_file("/nonexistent.conf", t, f), IoError);
}

TEST(Config, FileErrorsNamePathAndLine) {
  test::TempDir dir;
  test::write_file(dir / "x.conf", "tau = 0.2\nbogus = 1\n");
  TrainConfig t;
  FewshotConfig f;
  try {
    apply_config_file(dir / "x.conf", t, f);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("x.conf"), std::string::npos);
    EXPECT_NE(msg.find("line 2"), std::string::npos);
  }
}

}  // namespace
}  // namespace recon
