#pragma once

#include <functional>
#include <vector>

#include "lpae/image_io.hpp"
#include "lpae/model.hpp"
#include "lpae/optim.hpp"
#include "lpae/sr.hpp"

namespace lpae {

/// Loss terms, and gradients accumulated into `grads`, for one LPAE batch.
/// `recon_psnr`, when set, receives PSNR(batch, I').
LpaeLoss lpae_loss_and_grads(const LpaeParams& params, const Tensor& batch,
                             const LpaeLossWeights& weights, LpaeParams& grads,
                             double* recon_psnr = nullptr);

/// Batches per epoch: ceil(corpus / batch). Random crops have no natural epoch.
std::size_t steps_per_epoch(std::size_t corpus_size, std::size_t batch);
std::size_t total_steps(const TrainConfig& cfg, std::size_t corpus_size);

struct LpaeEpoch {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double lr = 0.0;
  LpaeLossTerms loss{};  // means over the epoch's batches
  double psnr = 0.0;     // mean reconstruction PSNR over the epoch's batches
};

struct LpaeTrainResult {
  LpaeParams params;
  std::vector<LpaeEpoch> history;
  LpaeLossTerms initial{};  // first batch, before any update
};

using LpaeEpochCallback = std::function<void(const LpaeEpoch&)>;

/// Xavier-initialises from cfg.seed and trains on random crops.
LpaeTrainResult train_lpae(const Corpus& corpus, const TrainConfig& cfg,
                           const LpaeEpochCallback& on_epoch = {});

struct SrEpoch {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double lr = 0.0;
  double reconstruction = 0.0;
  double pyramid = 0.0;
  double total = 0.0;
  double psnr = 0.0;
};

struct SrTrainResult {
  EmbedParams embed;
  LpaeParams lpae;  // unchanged unless cfg.freeze_decoder is false
  std::vector<SrEpoch> history;
  double initial_loss = 0.0;
};

using SrEpochCallback = std::function<void(const SrEpoch&)>;

/// Trains the embedding network (and optionally the LPAE decoder) for
/// scale 2^cfg.levels against LPAE pyramid targets.
SrTrainResult train_sr(const Corpus& corpus, const LpaeParams& lpae, const TrainConfig& cfg,
                       const SrEpochCallback& on_epoch = {});

}  // namespace lpae
