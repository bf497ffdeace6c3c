#include <gtest/gtest.h>

#include <lpae/container.hpp>
#include <lpae/model.hpp>

#include "gradcheck.hpp"
#include "support.hpp"

using namespace lpae;

namespace {

LpaeParams seeded(std::uint64_t seed) {
  Rng rng(seed);
  return LpaeParams::xavier(rng);
}

void zero_decoder_bias(LpaeParams& p) {
  for (auto& l : p.decoder.layers) std::fill(l.bias.begin(), l.bias.end(), 0.0);
}

}  // namespace

TEST(Lpae, ParameterCount) {
  EXPECT_EQ(LpaeParams::zeros().param_count(), 17337u);
  LpaeParams p = LpaeParams::zeros();
  std::size_t total = 0;
  for (const auto& v : p.params()) total += v.values.size();
  EXPECT_EQ(total, LpaeParams::kParamCount);
  EXPECT_EQ(p.params().size(), 24u);
  EXPECT_EQ(p.params()[0].name, "approx.0.weight");
  EXPECT_EQ(p.params()[8].name, "detail.0.weight");
  EXPECT_EQ(p.params()[8].dims, (std::vector<std::size_t>{16, 6, 3, 3}));
  EXPECT_EQ(p.params()[16].name, "decoder.0.weight");
  EXPECT_EQ(p.params()[16].dims, (std::vector<std::size_t>{16, 3, 4, 4}));
  EXPECT_EQ(p.decoder_params().size(), 8u);
}

TEST(Lpae, EncodeShapes) {
  Rng rng(1);
  Encoded e = encode(seeded(2), test::random_tensor(rng, {1, 3, 64, 64}, 0, 1));
  EXPECT_EQ(e.approx.shape(), (Shape{1, 3, 32, 32}));
  EXPECT_EQ(e.detail.shape(), (Shape{1, 3, 64, 64}));
}

TEST(Lpae, ZeroParamsEncodeToZero) {
  Rng rng(1);
  Encoded e = encode(LpaeParams::zeros(), test::random_tensor(rng, {2, 3, 16, 16}, 0, 1));
  EXPECT_EQ(max_abs(e.approx), 0.0);
  EXPECT_EQ(max_abs(e.detail), 0.0);
}

TEST(Lpae, EncodeIsDeterministic) {
  Rng rng(3);
  Tensor x = test::random_tensor(rng, {1, 3, 16, 16}, 0, 1);
  Encoded a = encode(seeded(4), x);
  Encoded b = encode(seeded(4), x);
  EXPECT_EQ(a.approx, b.approx);
  EXPECT_EQ(a.detail, b.detail);
}

TEST(Lpae, RejectsBadInputs) {
  LpaeParams p = LpaeParams::zeros();
  EXPECT_THROW(encode(p, Tensor(1, 1, 8, 8)), ShapeError);
  EXPECT_THROW(encode(p, Tensor(1, 3, 7, 8)), ShapeError);
  EXPECT_THROW(decode(p, Tensor(1, 3, 4, 4), Tensor(1, 3, 6, 6)), ShapeError);
}

TEST(Lpae, ZeroApproxDecodesToDetail) {
  LpaeParams p = seeded(5);
  zero_decoder_bias(p);
  Rng rng(6);
  Tensor d = test::random_tensor(rng, {1, 3, 8, 8});
  EXPECT_EQ(decode(p, Tensor(1, 3, 4, 4), d), d);
}

TEST(Lpae, DetailPerturbationPassesThrough) {
  LpaeParams p = seeded(7);
  Rng rng(8);
  Tensor c = test::random_tensor(rng, {1, 3, 4, 4});
  Tensor d = test::random_tensor(rng, {1, 3, 8, 8});
  Tensor base = decode(p, c, d);
  Tensor d2 = d;
  d2.at(0, 1, 3, 5) += 0.125;
  Tensor moved = decode(p, c, d2);
  Tensor diff = sub(moved, base);
  EXPECT_NEAR(diff.at(0, 1, 3, 5), 0.125, 1e-15);
  diff.at(0, 1, 3, 5) = 0.0;
  EXPECT_EQ(max_abs(diff), 0.0);
}

TEST(Lpae, ForwardIdentityHoldsExactly) {
  Rng rng(9);
  LpaeOutput o = lpae_forward(seeded(10), test::random_tensor(rng, {2, 3, 16, 16}, 0, 1));
  EXPECT_EQ(sub(o.recon, o.detail), sub(add(o.detail, o.prediction), o.detail));
  EXPECT_EQ(o.recon, add(o.detail, o.prediction));
  EXPECT_EQ(o.recon.shape(), (Shape{2, 3, 16, 16}));
}

TEST(Lpae, EndToEndGradientMatchesFiniteDifference) {
  auto r = test::lpae_end_to_end_check(21, 12);
  EXPECT_GT(r.coords, 200u);
  EXPECT_LT(r.max_rel_err, 1e-4);
}

TEST(LpaePyramid, Shapes) {
  Rng rng(11);
  auto p = encode_pyramid(seeded(12), test::random_tensor(rng, {1, 3, 64, 64}, 0, 1), 3);
  ASSERT_EQ(p.levels(), 3u);
  EXPECT_EQ(p.details[0].shape().h, 64u);
  EXPECT_EQ(p.details[1].shape().h, 32u);
  EXPECT_EQ(p.details[2].shape().h, 16u);
  EXPECT_EQ(p.coarsest.shape().h, 8u);
}

TEST(LpaePyramid, SingleLevelIsEncode) {
  Rng rng(13);
  LpaeParams params = seeded(14);
  Tensor x = test::random_tensor(rng, {1, 3, 16, 16}, 0, 1);
  auto p = encode_pyramid(params, x, 1);
  Encoded e = encode(params, x);
  EXPECT_EQ(p.coarsest, e.approx);
  EXPECT_EQ(p.details[0], e.detail);
  EXPECT_EQ(decode_pyramid(params, p), decode(params, e.approx, e.detail));
}

TEST(LpaePyramid, MatchesLoopOfSingleLevels) {
  Rng rng(15);
  LpaeParams params = seeded(16);
  Tensor x = test::random_tensor(rng, {1, 3, 32, 32}, 0, 1);
  auto p = encode_pyramid(params, x, 3);
  Tensor cur = x;
  std::vector<Tensor> details;
  for (int k = 0; k < 3; ++k) {
    Encoded e = encode(params, cur);
    details.push_back(e.detail);
    cur = e.approx;
  }
  EXPECT_EQ(p.coarsest, cur);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(p.details[k], details[k]);
  Tensor rec = cur;
  for (int k = 2; k >= 0; --k) rec = decode(params, rec, details[k]);
  EXPECT_EQ(decode_pyramid(params, p), rec);
}

TEST(LpaePyramid, ZeroDetailsGiveIteratedPrediction) {
  LpaeParams params = seeded(17);
  zero_decoder_bias(params);
  Rng rng(18);
  PyramidDecomposition p;
  p.coarsest = test::random_tensor(rng, {1, 3, 4, 4});
  p.details = {Tensor(1, 3, 16, 16), Tensor(1, 3, 8, 8)};
  EXPECT_EQ(decode_pyramid(params, p), predict(params, predict(params, p.coarsest)));
}

TEST(LpaePyramid, TopDetailChangeIsAdditive) {
  LpaeParams params = seeded(19);
  Rng rng(20);
  auto p = encode_pyramid(params, test::random_tensor(rng, {1, 3, 16, 16}, 0, 1), 2);
  Tensor base = decode_pyramid(params, p);
  Tensor delta = test::random_tensor(rng, p.details[0].shape());
  axpy(p.details[0], delta);
  EXPECT_LT(max_abs_diff(sub(decode_pyramid(params, p), base), delta), 1e-14);
}

TEST(LpaePyramid, DecodeBackwardMatchesFiniteDifference) {
  LpaeParams params = seeded(22);
  Rng rng(23);
  // Non-zero biases keep ReLU inputs off the kink at exactly 0.
  for (auto& v : params.params())
    if (!v.decay)
      for (auto& b : v.values) b = rng.uniform(-0.1, 0.1);
  auto p = encode_pyramid(params, test::random_tensor(rng, {1, 3, 16, 16}, 0, 1), 2);
  PyramidDecodeTape tape;
  Tensor out = decode_pyramid(params, p, &tape);
  Tensor r = test::random_tensor(rng, out.shape());
  LpaeParams grads = params.zeros_like();
  auto g = decode_pyramid_backward(params, tape, r, &grads);
  auto f = [&] { return sum(mul(r, decode_pyramid(params, p))); };
  EXPECT_LT(test::max_fd_error(f, p.coarsest.data(), g.coarsest.data()), 1e-4);
  EXPECT_LT(test::max_fd_error(f, p.details[1].data(), g.details[1].data()), 1e-4);
  auto pv = params.decoder_params();
  auto gv = grads.decoder_params();
  for (std::size_t t = 0; t < pv.size(); ++t)
    for (std::size_t j = 0; j < 5; ++j) {
      const std::size_t i = rng.below(pv[t].values.size());
      EXPECT_LT(test::rel_err(gv[t].values[i], test::central_diff(f, pv[t].values[i])), 1e-4) << pv[t].name;
    }
  // encoder parameters are untouched by the decode backward
  for (const auto& v : grads.params())
    if (v.name.rfind("decoder", 0) != 0)
      for (double x : v.values) ASSERT_EQ(x, 0.0) << v.name;
}

TEST(LpaePyramid, DivisibilityErrorNamesDivisor) {
  Rng rng(24);
  try {
    encode_pyramid(seeded(25), test::random_tensor(rng, {1, 3, 24, 24}), 4);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("16"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  auto dir = test::scratch_dir("ckpt");
  save_checkpoint(seeded(26), dir / "a.lpae");
  save_checkpoint(load_checkpoint(dir / "a.lpae"), dir / "b.lpae");
  EXPECT_EQ(read_file(dir / "a.lpae"), read_file(dir / "b.lpae"));
}

TEST(Checkpoint, FreshInitReloadsToIdenticalForward) {
  auto dir = test::scratch_dir("ckpt_fwd");
  LpaeParams p = seeded(7);
  save_checkpoint(p, dir / "p.lpae");
  LpaeParams q = load_checkpoint(dir / "p.lpae");
  Rng rng(27);
  Tensor x = test::random_tensor(rng, {1, 3, 16, 16}, 0, 1);
  EXPECT_EQ(lpae_forward(p, x).recon, lpae_forward(q, x).recon);
}

TEST(Checkpoint, CorruptionRejected) {
  auto dir = test::scratch_dir("ckpt_bad");
  save_checkpoint(seeded(28), dir / "a.lpae");
  auto bytes = read_file(dir / "a.lpae");
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  write_file_atomic(dir / "m.lpae", bad_magic);
  EXPECT_THROW(load_checkpoint(dir / "m.lpae"), DataError);
  auto bad_payload = bytes;
  bad_payload[bytes.size() / 2] ^= 1;
  write_file_atomic(dir / "p.lpae", bad_payload);
  EXPECT_THROW(load_checkpoint(dir / "p.lpae"), DataError);
  write_file_atomic(dir / "t.lpae", std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 100));
  EXPECT_THROW(load_checkpoint(dir / "t.lpae"), DataError);
  // right container, wrong shape table
  write_container(dir / "s.lpae", kMagicLpae, {NamedTensor{"approx.0.weight", {1}, {0.0}}});
  EXPECT_THROW(load_checkpoint(dir / "s.lpae"), DataError);
}
