#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lpae/container.hpp"
#include "lpae/losses.hpp"
#include "lpae/nn.hpp"

namespace lpae {

enum class OptimizerKind { sgd_momentum, adam };

/// lr(epoch) = lr0 * factor^floor(epoch / every_n_epochs)
struct StepSchedule {
  std::size_t every_n_epochs = 50;
  double factor = 0.5;
};

double lr_at(double lr0, const StepSchedule& schedule, std::size_t epoch);

/// Everything a training run needs. Loadable from `key = value` text; see
/// `config_keys()` for the accepted keys.
struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr = 1e-3;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  StepSchedule schedule{};
  bool f32_state = true;  // round parameters and optimiser state to float after each step

  std::size_t batch = 4;
  std::size_t epochs = 10;
  std::size_t steps = 0;  // when > 0, overrides epochs as the total step count
  std::uint64_t seed = 1;

  std::size_t crop = 64;
  bool flip_h = true;
  bool flip_v = true;

  LpaeLossWeights lpae_weights{};

  // super-resolution
  std::size_t levels = 1;  // scale = 2^levels
  double sr_gamma = 1.0;
  double sr_delta = 10.0;
  std::vector<double> lambdas;  // empty: LpsrLossWeights::default_lambdas(levels)
  bool freeze_decoder = true;
  std::size_t embed_channels = 32;
  std::size_t embed_blocks = 3;

  LpsrLossWeights lpsr_weights() const;
  void validate() const;
};

const std::vector<std::string>& config_keys();
TrainConfig parse_train_config(std::string_view text);
TrainConfig load_train_config(const std::filesystem::path& path);
/// Canonical `key = value` rendering (every key, fixed order, round-trippable).
std::string to_config_text(const TrainConfig& cfg);

/// Per-parameter optimiser buffers.
struct OptimizerState {
  std::vector<std::vector<double>> first;   // SGD velocity or Adam first moment
  std::vector<std::vector<double>> second;  // Adam second moment (empty for SGD)
  std::size_t step = 0;
};

/// v <- momentum * v + (g + wd * p);  p <- p - lr * v.  Weight decay only where `decay`.
void sgd_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
              OptimizerState& state, const TrainConfig& cfg, double lr);

/// Bias-corrected Adam. Weight decay (if non-zero) is added to the gradient.
void adam_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               OptimizerState& state, const TrainConfig& cfg, double lr);

class Optimizer {
 public:
  explicit Optimizer(TrainConfig cfg) : cfg_(std::move(cfg)) {}

  /// Rejects non-finite gradients before touching any parameter.
  void step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads, double lr);

  const OptimizerState& state() const { return state_; }
  std::vector<NamedTensor> state_tensors(const std::vector<ParamView>& params) const;
  void load_state(const std::vector<NamedTensor>& tensors, const std::vector<ParamView>& params);

  void save(const std::filesystem::path& path, const std::vector<ParamView>& params) const;
  void load(const std::filesystem::path& path, const std::vector<ParamView>& params);

 private:
  TrainConfig cfg_;
  OptimizerState state_;
};

}  // namespace lpae
