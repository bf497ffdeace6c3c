#include "gradcheck.hpp"

#include <lpae/losses.hpp>
#include <lpae/sr.hpp>
#include <lpae/train.hpp>

#include "support.hpp"

namespace lpae::test {

namespace {

void randomize(ConvLayer& l, Rng& rng) {
  for (auto& v : l.weights.data()) v = rng.uniform(-0.5, 0.5);
  for (auto& b : l.bias) b = rng.uniform(-0.5, 0.5);
}

// Moves every entry at least `gap` away from the matching entry of `ref`, so
// L1 terms are differentiable at the check point.
void avoid_ties(Tensor& t, const Tensor& ref, double gap = 1e-3) {
  for (std::size_t i = 0; i < t.numel(); ++i)
    if (std::abs(t[i] - ref[i]) < gap) t[i] = ref[i] + 0.1;
}

GradCheck check_layer(const std::string& name, ConvLayer l, Tensor x, Rng& rng) {
  Tensor r = random_tensor(rng, layer_forward(l, x).shape());
  ConvGrads g = layer_backward(l, x, r);
  auto f = [&] { return sum(mul(r, layer_forward(l, x))); };
  GradCheck out{name, 0.0, l.weights.numel() + l.bias.size() + x.numel()};
  out.max_rel_err = std::max({max_fd_error(f, l.weights.data(), g.weights.data()),
                              max_fd_error(f, l.bias, g.bias), max_fd_error(f, x.data(), g.input.data())});
  return out;
}

GradCheck check_loss(const std::string& name, const std::function<double()>& f, Tensor& arg,
                     const Tensor& grad) {
  return GradCheck{name, max_fd_error(f, arg.data(), grad.data()), arg.numel()};
}

}  // namespace

std::vector<GradCheck> layer_grad_checks(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCheck> out;
  ConvLayer c1 = ConvLayer::conv3x3(3, 4);
  randomize(c1, rng);
  out.push_back(check_layer("conv3x3 stride 1", c1, random_tensor(rng, {2, 3, 8, 8}), rng));
  ConvLayer c2 = ConvLayer::conv3x3(3, 4, 2);
  randomize(c2, rng);
  out.push_back(check_layer("conv3x3 stride 2", c2, random_tensor(rng, {2, 3, 8, 8}), rng));
  ConvLayer t = ConvLayer::transposed4x4(3, 3);
  randomize(t, rng);
  out.push_back(check_layer("tconv4x4 stride 2", t, random_tensor(rng, {2, 3, 4, 4}), rng));

  Tensor x = random_tensor(rng, {2, 3, 8, 8});
  for (auto& v : x.data())
    if (std::abs(v) < 1e-3) v = 0.5;
  Tensor r = random_tensor(rng, x.shape());
  Tensor g = relu_backward(x, r);
  out.push_back(check_loss("relu", [&] { return sum(mul(r, relu_forward(x))); }, x, g));

  ConvChain chain;
  chain.push(ConvLayer::conv3x3(3, 4, 2), true);
  chain.push(ConvLayer::transposed4x4(4, 4), true);
  chain.push(ConvLayer::conv3x3(4, 3), false);
  for (auto& l : chain.layers) randomize(l, rng);
  Tensor cx = random_tensor(rng, {2, 3, 8, 8});
  GradTape tape;
  Tensor ry = random_tensor(rng, chain_forward(chain, cx, &tape).shape());
  ConvChain grads = chain.zeros_like();
  Tensor gx = chain_backward(chain, tape, ry, grads);
  auto f = [&] { return sum(mul(ry, chain_forward(chain, cx))); };
  GradCheck cc{"conv chain", max_fd_error(f, cx.data(), gx.data()), cx.numel()};
  for (std::size_t i = 0; i < chain.size(); ++i) {
    cc.max_rel_err = std::max({cc.max_rel_err,
                               max_fd_error(f, chain.layers[i].weights.data(), grads.layers[i].weights.data()),
                               max_fd_error(f, chain.layers[i].bias, grads.layers[i].bias)});
    cc.coords += chain.layers[i].param_count();
  }
  out.push_back(cc);
  return out;
}

std::vector<GradCheck> loss_grad_checks(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCheck> out;
  const Shape s{2, 3, 8, 8};
  const Shape half{2, 3, 4, 4};

  Tensor target = random_tensor(rng, s, 0.0, 1.0);
  Tensor recon = random_tensor(rng, s, 0.0, 1.0);
  avoid_ties(recon, target);
  out.push_back(check_loss("l_r", [&] { return loss_reconstruction(target, recon).value; }, recon,
                           loss_reconstruction(target, recon).grad));

  Tensor approx = random_tensor(rng, half);
  Tensor down = random_tensor(rng, half);
  out.push_back(check_loss("l_e", [&] { return loss_energy(approx, down).value; }, approx,
                           loss_energy(approx, down).grad));

  Tensor detail = random_tensor(rng, s);
  out.push_back(check_loss("l_s", [&] { return loss_sparsity(detail).value; }, detail,
                           loss_sparsity(detail).grad));

  Tensor image = random_tensor(rng, s, 0.0, 1.0);
  Tensor a = random_tensor(rng, half), d = random_tensor(rng, s), rec = random_tensor(rng, s, 0.0, 1.0);
  avoid_ties(rec, image);
  const LpaeLossWeights w{};
  auto total = [&] { return loss_lpae_total(image, a, d, rec, w).terms.total; };
  LpaeLoss l = loss_lpae_total(image, a, d, rec, w);
  GradCheck t{"l_total (LPAE)", 0.0, a.numel() + d.numel() + rec.numel()};
  t.max_rel_err = std::max({max_fd_error(total, a.data(), l.grad_approx.data()),
                            max_fd_error(total, d.data(), l.grad_detail.data()),
                            max_fd_error(total, rec.data(), l.grad_recon.data())});
  out.push_back(t);

  // LPSR with K = 2
  PyramidDecomposition targets, preds;
  targets.coarsest = random_tensor(rng, {1, 3, 2, 2});
  targets.details = {random_tensor(rng, {1, 3, 8, 8}), random_tensor(rng, {1, 3, 4, 4})};
  preds.coarsest = random_tensor(rng, {1, 3, 2, 2});
  preds.details = {random_tensor(rng, {1, 3, 8, 8}), random_tensor(rng, {1, 3, 4, 4})};
  avoid_ties(preds.coarsest, targets.coarsest);
  for (std::size_t k = 0; k < 2; ++k) avoid_ties(preds.details[k], targets.details[k]);
  Tensor hr = random_tensor(rng, {1, 3, 8, 8}, 0.0, 1.0);
  Tensor sr = random_tensor(rng, {1, 3, 8, 8}, 0.0, 1.0);
  avoid_ties(sr, hr);
  LpsrLossWeights sw;
  auto lpsr = [&] { return loss_lpsr(preds, targets, hr, sr, sw).total; };
  LpsrLoss ll = loss_lpsr(preds, targets, hr, sr, sw);
  GradCheck p{"l_total (LPSR, K=2)", 0.0, 0};
  p.max_rel_err = std::max(max_fd_error(lpsr, preds.coarsest.data(), ll.grad_preds.coarsest.data()),
                           max_fd_error(lpsr, sr.data(), ll.grad_recon.data()));
  p.coords = preds.coarsest.numel() + sr.numel();
  for (std::size_t k = 0; k < 2; ++k) {
    p.max_rel_err =
        std::max(p.max_rel_err, max_fd_error(lpsr, preds.details[k].data(), ll.grad_preds.details[k].data()));
    p.coords += preds.details[k].numel();
  }
  out.push_back(p);
  return out;
}

GradCheck lpae_end_to_end_check(std::uint64_t seed, std::size_t per_tensor, double tol) {
  Rng rng(seed);
  LpaeParams params = LpaeParams::xavier(rng);
  for (auto& v : params.params())
    if (!v.decay)
      for (auto& b : v.values) b = rng.uniform(-0.1, 0.1);
  Tensor image = random_tensor(rng, {1, 3, 8, 8}, 0.0, 1.0);
  const LpaeLossWeights w{};
  LpaeParams grads = params.zeros_like();
  lpae_loss_and_grads(params, image, w, grads);

  auto f = [&] {
    LpaeOutput o = lpae_forward(params, image);
    return loss_lpae_total(image, o.approx, o.detail, o.recon, w).terms.total;
  };
  auto pv = params.params();
  auto gv = grads.params();
  GradCheck out{"LPAE end-to-end (8x8)", 0.0, 0};
  for (std::size_t t = 0; t < pv.size(); ++t) {
    const std::size_t n = pv[t].values.size();
    const std::size_t take = per_tensor == 0 ? n : std::min(per_tensor, n);
    for (std::size_t j = 0; j < take; ++j) {
      const std::size_t i = take == n ? j : rng.below(n);
      const FdPoint p = fd_point(f, pv[t].values[i], gv[t].values[i], tol);
      out.max_rel_err = std::max(out.max_rel_err, p.err());
      out.kinks += p.kink;
      ++out.coords;
    }
  }
  return out;
}

GradCheck lpsr_embed_check(std::uint64_t seed, std::size_t coords, double tol) {
  Rng rng(seed);
  LpaeParams lpae = LpaeParams::xavier(rng);
  EmbedParams embed = EmbedParams::xavier(rng, 1, 8, 2);
  Tensor hr = random_tensor(rng, {1, 3, 16, 16}, 0.0, 1.0);
  LpsrLossWeights w;
  w.lambdas = LpsrLossWeights::default_lambdas(1);
  EmbedParams grads = embed.zeros_like();
  sr_loss_and_grads(embed, lpae, hr, w, grads, nullptr);

  const PyramidDecomposition targets = encode_pyramid(lpae, hr, 1);
  auto f = [&] {
    SrResult sr = sr_forward(embed, lpae, targets.coarsest);
    return loss_lpsr(sr.preds, targets, hr, sr.image, w).total;
  };
  auto pv = embed.params();
  auto gv = grads.params();
  GradCheck out{"LPSR embed (16x16, K=1)", 0.0, coords};
  for (std::size_t c = 0; c < coords; ++c) {
    const std::size_t t = rng.below(pv.size());
    const std::size_t i = rng.below(pv[t].values.size());
    const FdPoint p = fd_point(f, pv[t].values[i], gv[t].values[i], tol);
    out.max_rel_err = std::max(out.max_rel_err, p.err());
    out.kinks += p.kink;
  }
  return out;
}

}  // namespace lpae::test
