#include <gtest/gtest.h>

#include <lpae/train.hpp>

#include "support.hpp"

using namespace lpae;

namespace {

Corpus small_corpus(std::size_t count = 4, std::size_t size = 24) {
  Rng rng(100);
  std::vector<Tensor> images;
  for (std::size_t i = 0; i < count; ++i) images.push_back(synthetic_image(rng, size));
  return Corpus(std::move(images));
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.crop = 16;
  cfg.batch = 2;
  cfg.steps = 50;
  cfg.lr = 2e-3;
  cfg.weight_decay = 0.0;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST(Steps, EpochArithmetic) {
  EXPECT_EQ(steps_per_epoch(8, 4), 2u);
  EXPECT_EQ(steps_per_epoch(9, 4), 3u);
  EXPECT_EQ(steps_per_epoch(1, 4), 1u);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch = 4;
  EXPECT_EQ(total_steps(cfg, 9), 9u);
  cfg.steps = 5;
  EXPECT_EQ(total_steps(cfg, 9), 5u);
}

TEST(TrainLpae, LossDecreasesOverFiftySteps) {
  auto r = train_lpae(small_corpus(), small_config());
  ASSERT_FALSE(r.history.empty());
  EXPECT_LT(r.history.back().loss.total, r.initial.total);
  std::size_t steps = 0;
  for (const auto& e : r.history) steps += e.steps;
  EXPECT_EQ(steps, 50u);
  EXPECT_EQ(r.history.size(), 25u);
}

TEST(TrainLpae, SeededRunsAreIdentical) {
  TrainConfig cfg = small_config();
  cfg.steps = 6;
  auto a = train_lpae(small_corpus(), cfg);
  auto b = train_lpae(small_corpus(), cfg);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].loss.total, b.history[i].loss.total);
  auto pa = a.params.params();
  auto pb = b.params.params();
  for (std::size_t i = 0; i < pa.size(); ++i)
    EXPECT_TRUE(std::equal(pa[i].values.begin(), pa[i].values.end(), pb[i].values.begin()));
}

TEST(TrainLpae, SgdAlsoRuns) {
  TrainConfig cfg = small_config();
  cfg.optimizer = OptimizerKind::sgd_momentum;
  cfg.lr = 0.01;
  cfg.steps = 30;
  auto r = train_lpae(small_corpus(), cfg);
  EXPECT_LT(r.history.back().loss.total, r.initial.total);
}

TEST(TrainLpae, EpochCallbackAndSchedule) {
  TrainConfig cfg = small_config();
  cfg.steps = 8;
  cfg.schedule = {2, 0.5};
  std::vector<double> lrs;
  train_lpae(small_corpus(), cfg, [&](const LpaeEpoch& e) { lrs.push_back(e.lr); });
  ASSERT_EQ(lrs.size(), 4u);
  EXPECT_DOUBLE_EQ(lrs[0], 2e-3);
  EXPECT_DOUBLE_EQ(lrs[2], 1e-3);
}

TEST(TrainLpae, RejectsBadCorpus) {
  TrainConfig cfg = small_config();
  EXPECT_THROW(train_lpae(Corpus{}, cfg), DataError);
  EXPECT_THROW(train_lpae(Corpus({Tensor(1, 1, 32, 32)}), cfg), DataError);
  cfg.crop = 32;
  EXPECT_THROW(train_lpae(small_corpus(), cfg), DataError);
}

TEST(TrainSr, LossDecreasesAndDecoderFrozen) {
  Rng rng(3);
  LpaeParams lpae = LpaeParams::xavier(rng);
  TrainConfig cfg = small_config();
  cfg.embed_channels = 8;
  cfg.embed_blocks = 1;
  auto r = train_sr(small_corpus(), lpae, cfg);
  EXPECT_LT(r.history.back().total, r.initial_loss);
  auto before = lpae.params();
  auto after = r.lpae.params();
  for (std::size_t i = 0; i < before.size(); ++i)
    EXPECT_TRUE(std::equal(before[i].values.begin(), before[i].values.end(), after[i].values.begin()));
}

TEST(TrainSr, JointFineTuneChangesOnlyDecoder) {
  Rng rng(4);
  LpaeParams lpae = LpaeParams::xavier(rng);
  TrainConfig cfg = small_config();
  cfg.steps = 3;
  cfg.embed_channels = 4;
  cfg.embed_blocks = 1;
  cfg.freeze_decoder = false;
  auto r = train_sr(small_corpus(), lpae, cfg);
  auto before = lpae.params();
  auto after = r.lpae.params();
  bool decoder_moved = false;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const bool same = std::equal(before[i].values.begin(), before[i].values.end(), after[i].values.begin());
    if (before[i].name.rfind("decoder", 0) == 0) decoder_moved |= !same;
    else EXPECT_TRUE(same) << before[i].name;
  }
  EXPECT_TRUE(decoder_moved);
}

TEST(TrainSr, ScaleFourRunsWithFiniteLoss) {
  Rng rng(5);
  LpaeParams lpae = LpaeParams::xavier(rng);
  TrainConfig cfg = small_config();
  cfg.levels = 2;
  cfg.steps = 3;
  cfg.embed_channels = 4;
  cfg.embed_blocks = 1;
  auto r = train_sr(small_corpus(), lpae, cfg);
  EXPECT_TRUE(std::isfinite(r.history.back().total));
  EXPECT_EQ(r.embed.heads.size(), 2u);
}
