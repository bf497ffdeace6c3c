#include "lpae/train.hpp"

#include <cmath>

#include "lpae/analysis.hpp"

namespace lpae {

LpaeLoss lpae_loss_and_grads(const LpaeParams& params, const Tensor& batch,
                             const LpaeLossWeights& weights, LpaeParams& grads, double* recon_psnr) {
  LpaeTape tape;
  LpaeOutput out = lpae_forward(params, batch, &tape);
  LpaeLoss loss = loss_lpae_total(batch, out.approx, out.detail, out.recon, weights);
  if (!std::isfinite(loss.terms.total)) throw NumericError("lpae training: non-finite loss");
  lpae_backward(params, tape, LpaeOutputGrads{loss.grad_approx, loss.grad_detail, loss.grad_recon}, grads);
  if (recon_psnr) *recon_psnr = psnr(batch, out.recon);
  return loss;
}

std::size_t steps_per_epoch(std::size_t corpus_size, std::size_t batch) {
  if (batch == 0) throw ShapeError("steps_per_epoch: batch must be >= 1");
  return std::max<std::size_t>(1, (corpus_size + batch - 1) / batch);
}

std::size_t total_steps(const TrainConfig& cfg, std::size_t corpus_size) {
  return cfg.steps > 0 ? cfg.steps : cfg.epochs * steps_per_epoch(corpus_size, cfg.batch);
}

namespace {

SampleConfig sample_config(const TrainConfig& cfg) {
  return SampleConfig{cfg.crop, cfg.flip_h, cfg.flip_v, cfg.batch};
}

void check_corpus(const Corpus& corpus, const TrainConfig& cfg) {
  if (corpus.empty()) throw DataError("training corpus is empty");
  if (corpus.channels() != LpaeParams::kChannels) {
    throw DataError("training corpus must contain RGB (P6) images");
  }
  if (corpus.min_side() < cfg.crop) {
    throw DataError("crop " + std::to_string(cfg.crop) + " exceeds the smallest corpus image side " +
                    std::to_string(corpus.min_side()));
  }
}

// Identical batches give +inf; cap so epoch means stay finite.
double capped_psnr(double v) { return std::isinf(v) ? 100.0 : v; }

}  // namespace

LpaeTrainResult train_lpae(const Corpus& corpus, const TrainConfig& cfg, const LpaeEpochCallback& on_epoch) {
  cfg.validate();
  check_corpus(corpus, cfg);
  Rng rng(cfg.seed);
  LpaeTrainResult result{LpaeParams::xavier(rng), {}, {}};
  Optimizer opt(cfg);
  const SampleConfig sc = sample_config(cfg);
  const std::size_t spe = steps_per_epoch(corpus.size(), cfg.batch);
  const std::size_t steps = total_steps(cfg, corpus.size());

  LpaeEpoch acc;
  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t epoch = step / spe;
    const double lr = lr_at(cfg.lr, cfg.schedule, epoch);
    const Tensor batch = sample_batch(corpus, sc, rng);
    LpaeParams grads = result.params.zeros_like();
    double batch_psnr = 0.0;
    LpaeLoss loss = lpae_loss_and_grads(result.params, batch, cfg.lpae_weights, grads, &batch_psnr);
    if (step == 0) result.initial = loss.terms;
    opt.step(result.params.params(), grads.params(), lr);

    acc.epoch = epoch;
    acc.lr = lr;
    acc.steps += 1;
    acc.loss.reconstruction += loss.terms.reconstruction;
    acc.loss.energy += loss.terms.energy;
    acc.loss.sparsity += loss.terms.sparsity;
    acc.loss.total += loss.terms.total;
    acc.psnr += capped_psnr(batch_psnr);

    if ((step + 1) % spe == 0 || step + 1 == steps) {
      const double n = static_cast<double>(acc.steps);
      acc.loss.reconstruction /= n;
      acc.loss.energy /= n;
      acc.loss.sparsity /= n;
      acc.loss.total /= n;
      acc.psnr /= n;
      result.history.push_back(acc);
      if (on_epoch) on_epoch(acc);
      acc = LpaeEpoch{};
    }
  }
  return result;
}

SrTrainResult train_sr(const Corpus& corpus, const LpaeParams& lpae, const TrainConfig& cfg,
                       const SrEpochCallback& on_epoch) {
  cfg.validate();
  check_corpus(corpus, cfg);
  Rng rng(cfg.seed);
  SrTrainResult result{EmbedParams::xavier(rng, cfg.levels, cfg.embed_channels, cfg.embed_blocks), lpae, {}, 0.0};
  const LpsrLossWeights weights = cfg.lpsr_weights();
  Optimizer embed_opt(cfg);
  Optimizer decoder_opt(cfg);
  const SampleConfig sc = sample_config(cfg);
  const std::size_t spe = steps_per_epoch(corpus.size(), cfg.batch);
  const std::size_t steps = total_steps(cfg, corpus.size());

  SrEpoch acc;
  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t epoch = step / spe;
    const double lr = lr_at(cfg.lr, cfg.schedule, epoch);
    const Tensor hr = sample_batch(corpus, sc, rng);
    EmbedParams grads = result.embed.zeros_like();
    LpaeParams decoder_grads = result.lpae.zeros_like();
    double batch_psnr = 0.0;
    LpsrLoss loss = sr_loss_and_grads(result.embed, result.lpae, hr, weights, grads,
                                      cfg.freeze_decoder ? nullptr : &decoder_grads, &batch_psnr);
    if (step == 0) result.initial_loss = loss.total;
    embed_opt.step(result.embed.params(), grads.params(), lr);
    if (!cfg.freeze_decoder) decoder_opt.step(result.lpae.decoder_params(), decoder_grads.decoder_params(), lr);

    acc.epoch = epoch;
    acc.lr = lr;
    acc.steps += 1;
    acc.reconstruction += loss.reconstruction;
    acc.pyramid += loss.pyramid;
    acc.total += loss.total;
    acc.psnr += capped_psnr(batch_psnr);

    if ((step + 1) % spe == 0 || step + 1 == steps) {
      const double n = static_cast<double>(acc.steps);
      acc.reconstruction /= n;
      acc.pyramid /= n;
      acc.total /= n;
      acc.psnr /= n;
      result.history.push_back(acc);
      if (on_epoch) on_epoch(acc);
      acc = SrEpoch{};
    }
  }
  return result;
}

}  // namespace lpae
