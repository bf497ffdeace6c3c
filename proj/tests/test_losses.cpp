#include <gtest/gtest.h>

#include <lpae/losses.hpp>

#include "gradcheck.hpp"
#include "support.hpp"

using namespace lpae;

TEST(Losses, ReconstructionExamples) {
  Tensor x = Tensor::from({1, 1, 2, 2}, {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(loss_reconstruction(x, x).value, 0.0);
  EXPECT_EQ(max_abs(loss_reconstruction(x, x).grad), 0.0);  // sign(0) = 0
  EXPECT_DOUBLE_EQ(loss_reconstruction(Tensor(1, 1, 2, 2), Tensor(1, 1, 2, 2, 0.5)).value, 0.5);
}

TEST(Losses, ReconstructionMatchesScalarLoop) {
  Rng rng(1);
  Tensor a = test::random_tensor(rng, {2, 3, 5, 5}), b = test::random_tensor(rng, {2, 3, 5, 5});
  double oracle = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) oracle += std::abs(a[i] - b[i]);
  EXPECT_LE(test::rel_err(loss_reconstruction(a, b).value, oracle / a.numel()), 1e-12);
}

TEST(Losses, EnergyExamples) {
  Tensor x(1, 3, 4, 4, 0.3);
  EXPECT_EQ(loss_energy(x, x).value, 0.0);
  EXPECT_NEAR(loss_energy(add_scalar(x, 0.1), x).value, 0.01, 1e-15);
}

TEST(Losses, SparsityExamples) {
  EXPECT_EQ(loss_sparsity(Tensor(1, 3, 4, 4)).value, 0.0);
  EXPECT_EQ(loss_sparsity(Tensor(1, 3, 4, 4, 1.0)).value, 1.0);
}

TEST(Losses, ShapeMismatchRejected) {
  EXPECT_THROW(loss_reconstruction(Tensor(1, 1, 2, 2), Tensor(1, 1, 2, 3)), ShapeError);
  EXPECT_THROW(loss_energy(Tensor(1, 1, 2, 2), Tensor(1, 1, 1, 2)), ShapeError);
  EXPECT_THROW(loss_sparsity(Tensor{}), ShapeError);
}

TEST(Losses, LpaeTotalWeights) {
  EXPECT_EQ(lpae_total(LpaeLossTerms{0, 0, 0, 0}, {}), 0.0);
  EXPECT_NEAR(lpae_total(LpaeLossTerms{0.1, 0.2, 0.3, 0}, {}), 0.56, 1e-15);
  const LpaeLossWeights d{};
  EXPECT_EQ(d.alpha, 1.0);
  EXPECT_EQ(d.beta, 0.8);
  EXPECT_EQ(d.gamma, 1.0);
  // linear in the weight vector
  LpaeLossTerms t{0.3, 0.7, 0.11, 0};
  EXPECT_NEAR(lpae_total(t, {2, 1.6, 2}), 2 * lpae_total(t, {}), 1e-15);
}

TEST(Losses, LpaeTotalUsesBicubicTarget) {
  Rng rng(2);
  Tensor img = test::random_tensor(rng, {1, 3, 8, 8}, 0, 1);
  Tensor down = bicubic_down2(img);
  LpaeLoss l = loss_lpae_total(img, down, Tensor(1, 3, 8, 8), img, {});
  EXPECT_EQ(l.terms.total, 0.0);
  EXPECT_EQ(l.terms.energy, 0.0);
}

TEST(Losses, LpsrZeroWhenPerfect) {
  Rng rng(3);
  PyramidDecomposition t;
  t.coarsest = test::random_tensor(rng, {1, 3, 2, 2});
  t.details = {test::random_tensor(rng, {1, 3, 8, 8}), test::random_tensor(rng, {1, 3, 4, 4})};
  Tensor hr = test::random_tensor(rng, {1, 3, 8, 8});
  EXPECT_EQ(loss_lpsr(t, t, hr, hr, {}).total, 0.0);
}

TEST(Losses, LpsrWeightedSum) {
  // constant offsets give exact per-term L1 values
  PyramidDecomposition t, p;
  t.coarsest = Tensor(1, 3, 2, 2);
  t.details = {Tensor(1, 3, 8, 8), Tensor(1, 3, 4, 4)};
  p.coarsest = Tensor(1, 3, 2, 2, 0.1);
  p.details = {Tensor(1, 3, 8, 8, 0.2), Tensor(1, 3, 4, 4, 0.3)};
  Tensor hr(1, 3, 8, 8), sr(1, 3, 8, 8, 0.05);
  LpsrLoss l = loss_lpsr(p, t, hr, sr, {});
  EXPECT_NEAR(l.reconstruction, 0.05, 1e-15);
  EXPECT_NEAR(l.total, 6.25, 1e-12);
}

TEST(Losses, LpsrDefaultLambdas) {
  EXPECT_EQ(LpsrLossWeights::default_lambdas(1), (std::vector<double>{0.8}));
  auto three = LpsrLossWeights::default_lambdas(3);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_DOUBLE_EQ(three[1], 1.2);
  EXPECT_DOUBLE_EQ(three[2], 1.6);
  LpsrLossWeights d;
  EXPECT_EQ(d.gamma, 1.0);
  EXPECT_EQ(d.delta, 10.0);
}

TEST(Losses, LpsrLevelMismatchRejected) {
  PyramidDecomposition t;
  t.coarsest = Tensor(1, 3, 2, 2);
  t.details = {Tensor(1, 3, 4, 4)};
  Tensor hr(1, 3, 4, 4);
  EXPECT_THROW(loss_lpsr(t, t, hr, hr, {}), ShapeError);  // two default lambdas, one level
  PyramidDecomposition p = t;
  p.details.push_back(Tensor(1, 3, 2, 2));
  LpsrLossWeights w;
  w.lambdas = {0.8};
  EXPECT_THROW(loss_lpsr(p, t, hr, hr, w), ShapeError);
}

TEST(Losses, NonNegative) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    Tensor a = test::random_tensor(rng, {1, 1, 3, 3}), b = test::random_tensor(rng, {1, 1, 3, 3});
    EXPECT_GE(loss_reconstruction(a, b).value, 0.0);
    EXPECT_GE(loss_energy(a, b).value, 0.0);
    EXPECT_GE(loss_sparsity(a).value, 0.0);
  }
}

TEST(Losses, GradientsMatchFiniteDifference) {
  for (const auto& c : test::loss_grad_checks(5)) EXPECT_LT(c.max_rel_err, 1e-4) << c.name;
}

TEST(Layers, GradientsMatchFiniteDifference) {
  for (const auto& c : test::layer_grad_checks(6)) EXPECT_LT(c.max_rel_err, 1e-4) << c.name;
}
