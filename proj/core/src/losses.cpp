#include "lpae/losses.hpp"

#include <cmath>

namespace lpae {

LossValue loss_reconstruction(const Tensor& target, const Tensor& recon) {
  require_same_shape(target, recon, "loss_reconstruction");
  if (recon.empty()) throw ShapeError("loss_reconstruction: empty tensor");
  const double inv = 1.0 / static_cast<double>(recon.numel());
  LossValue out{0.0, Tensor(recon.shape())};
  auto t = target.data();
  auto r = recon.data();
  auto g = out.grad.data();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - t[i];
    out.value += std::abs(d);
    g[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
  }
  out.value *= inv;
  return out;
}

LossValue loss_energy(const Tensor& approx, const Tensor& target_down) {
  require_same_shape(approx, target_down, "loss_energy");
  if (approx.empty()) throw ShapeError("loss_energy: empty tensor");
  const double inv = 1.0 / static_cast<double>(approx.numel());
  LossValue out{0.0, Tensor(approx.shape())};
  auto a = approx.data();
  auto t = target_down.data();
  auto g = out.grad.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - t[i];
    out.value += d * d;
    g[i] = 2.0 * d * inv;
  }
  out.value *= inv;
  return out;
}

LossValue loss_sparsity(const Tensor& detail) {
  if (detail.empty()) throw ShapeError("loss_sparsity: empty tensor");
  const double inv = 1.0 / static_cast<double>(detail.numel());
  return LossValue{sum_sq(detail) * inv, scale(detail, 2.0 * inv)};
}

double lpae_total(const LpaeLossTerms& terms, const LpaeLossWeights& w) {
  return w.alpha * terms.reconstruction + w.beta * terms.energy + w.gamma * terms.sparsity;
}

LpaeLoss loss_lpae_total(const Tensor& image, const Tensor& approx, const Tensor& detail,
                         const Tensor& recon, const LpaeLossWeights& w) {
  LossValue lr = loss_reconstruction(image, recon);
  LossValue le = loss_energy(approx, bicubic_down2(image));
  LossValue ls = loss_sparsity(detail);
  LpaeLoss out;
  out.terms = LpaeLossTerms{lr.value, le.value, ls.value, 0.0};
  out.terms.total = lpae_total(out.terms, w);
  out.grad_recon = scale(lr.grad, w.alpha);
  out.grad_approx = scale(le.grad, w.beta);
  out.grad_detail = scale(ls.grad, w.gamma);
  return out;
}

std::vector<double> LpsrLossWeights::default_lambdas(std::size_t levels) {
  std::vector<double> out;
  for (std::size_t i = 0; i < levels; ++i) out.push_back(0.8 + 0.4 * static_cast<double>(i));
  return out;
}

LpsrLoss loss_lpsr(const PyramidDecomposition& preds, const PyramidDecomposition& targets,
                   const Tensor& hr, const Tensor& recon, const LpsrLossWeights& w) {
  const std::size_t levels = targets.levels();
  if (preds.levels() != levels) {
    throw ShapeError("loss_lpsr: predicted " + std::to_string(preds.levels()) +
                     " detail levels, targets have " + std::to_string(levels));
  }
  if (w.lambdas.size() != levels) {
    throw ShapeError("loss_lpsr: " + std::to_string(w.lambdas.size()) + " lambdas for " +
                     std::to_string(levels) + " levels");
  }
  LpsrLoss out;
  LossValue rec = loss_reconstruction(hr, recon);
  out.reconstruction = rec.value;
  out.grad_recon = scale(rec.grad, w.gamma);

  LossValue approx = loss_reconstruction(targets.coarsest, preds.coarsest);
  out.pyramid = approx.value;
  out.grad_preds.coarsest = scale(approx.grad, w.delta);
  for (std::size_t i = 0; i < levels; ++i) {
    LossValue d = loss_reconstruction(targets.details[i], preds.details[i]);
    out.pyramid += w.lambdas[i] * d.value;
    out.grad_preds.details.push_back(scale(d.grad, w.delta * w.lambdas[i]));
  }
  out.total = w.gamma * out.reconstruction + w.delta * out.pyramid;
  return out;
}

}  // namespace lpae
