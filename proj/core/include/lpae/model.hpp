#pragma once

#include <filesystem>
#include <vector>

#include "lpae/nn.hpp"
#include "lpae/pyramid.hpp"

namespace lpae {

/// Learnable weights of the Laplacian-pyramid-like autoencoder.
///
///   approx : conv 3->16 s2, 16->16, 16->16, 16->3          (ReLU between, linear output)
///   detail : conv 6->16, 16->16, 16->16, 16->3             (input = [I, nearest_up2(I_c)])
///   decoder: tconv 3->16 4x4 s2, conv 16->16, 16->16, 16->3 (the prediction map phi)
///
/// All convolutions are 3x3 with padding 1. Total: 17,337 parameters.
struct LpaeParams {
  ConvChain approx;
  ConvChain detail;
  ConvChain decoder;

  static constexpr std::size_t kChannels = 3;
  static constexpr std::size_t kWidth = 16;
  static constexpr std::size_t kParamCount = 17337;

  /// Architecture with all weights and biases zero.
  static LpaeParams zeros();
  /// Xavier-uniform weights, zero biases.
  static LpaeParams xavier(Rng& rng);

  std::size_t param_count() const;
  LpaeParams zeros_like() const;
  /// Stable names: approx.<i>.weight/bias, detail.<i>..., decoder.<i>...
  std::vector<ParamView> params();
  std::vector<ParamView> decoder_params();
};

struct Encoded {
  Tensor approx;  // I_c, half resolution
  Tensor detail;  // I_d, full resolution
};

struct LpaeOutput {
  Tensor approx;
  Tensor detail;
  Tensor prediction;  // phi(I_c)
  Tensor recon;       // I' = I_d + phi(I_c)
};

struct LpaeTape {
  GradTape approx;
  GradTape detail;
  GradTape decoder;
};

Encoded encode(const LpaeParams& params, const Tensor& image, LpaeTape* tape = nullptr);
/// phi(I_c): the decoder's upsampling prediction.
Tensor predict(const LpaeParams& params, const Tensor& approx, GradTape* tape = nullptr);
Tensor decode(const LpaeParams& params, const Tensor& approx, const Tensor& detail,
              GradTape* tape = nullptr);
LpaeOutput lpae_forward(const LpaeParams& params, const Tensor& image, LpaeTape* tape = nullptr);

/// Gradients w.r.t. the four forward outputs, given separately because the
/// losses touch I_c, I_d and I' individually.
struct LpaeOutputGrads {
  Tensor approx;
  Tensor detail;
  Tensor recon;
};

/// Accumulates parameter gradients into `grads` from a recorded forward pass.
void lpae_backward(const LpaeParams& params, const LpaeTape& tape, const LpaeOutputGrads& g,
                   LpaeParams& grads);

/// Recursive encode: details[k] comes from level k, coarsest is H / 2^levels.
PyramidDecomposition encode_pyramid(const LpaeParams& params, const Tensor& image, std::size_t levels);

struct PyramidDecodeTape {
  std::vector<GradTape> levels;  // levels[k] decodes into details[k]
};

Tensor decode_pyramid(const LpaeParams& params, const PyramidDecomposition& pyramid,
                      PyramidDecodeTape* tape = nullptr);

/// Backward of decode_pyramid. Returns gradients w.r.t. each input component;
/// decoder parameter gradients are accumulated if `decoder_grads` is set.
PyramidDecomposition decode_pyramid_backward(const LpaeParams& params, const PyramidDecodeTape& tape,
                                             const Tensor& grad_out, LpaeParams* decoder_grads);

void save_checkpoint(const LpaeParams& params, const std::filesystem::path& path);
LpaeParams load_checkpoint(const std::filesystem::path& path);

void require_pyramid_divisible(const Shape& s, std::size_t levels);

}  // namespace lpae
