#pragma once

#include <filesystem>
#include <vector>

#include "lpae/losses.hpp"
#include "lpae/model.hpp"

namespace lpae {

/// Embedding network that predicts LPAE pyramid components from a
/// low-resolution image.
///
///   stem        conv 3->C + ReLU
///   blocks      B x [conv C->C, ReLU, conv C->C] + identity skip
///   approx_head conv C->3                         -> I'_c at input size
///   heads[k]    (levels - k) x [tconv C->C 4x4 s2 + ReLU], conv C->3
///                                                 -> I'_d for pyramid level k
///
/// heads[0] predicts the full-resolution detail (input size * 2^levels).
struct EmbedParams {
  std::size_t levels = 1;
  ConvChain stem;
  std::vector<ConvChain> blocks;
  ConvChain approx_head;
  std::vector<ConvChain> heads;

  static EmbedParams zeros(std::size_t levels, std::size_t channels = 32, std::size_t blocks = 3);
  static EmbedParams xavier(Rng& rng, std::size_t levels, std::size_t channels = 32,
                            std::size_t blocks = 3);

  std::size_t channels() const { return stem.layers.front().out_channels(); }
  std::size_t param_count() const;
  EmbedParams zeros_like() const;
  std::vector<ParamView> params();
};

struct EmbedTape {
  GradTape stem;
  std::vector<GradTape> blocks;
  GradTape approx_head;
  std::vector<GradTape> heads;
};

/// Predicted pyramid: coarsest at input size, details[k] at input * 2^(levels - k).
PyramidDecomposition embed_forward(const EmbedParams& embed, const Tensor& lr_image,
                                   EmbedTape* tape = nullptr);
/// Accumulates parameter gradients; returns nothing since the input is data.
void embed_backward(const EmbedParams& embed, const EmbedTape& tape,
                    const PyramidDecomposition& grad_preds, EmbedParams& grads);

struct SrResult {
  Tensor image;                // decode_pyramid(lpae, preds)
  PyramidDecomposition preds;
};

SrResult sr_forward(const EmbedParams& embed, const LpaeParams& lpae, const Tensor& lr_image,
                    PyramidDecodeTape* decode_tape = nullptr, EmbedTape* embed_tape = nullptr);

/// LPSR objective on one HR batch. Targets come from encode_pyramid(lpae, hr)
/// and the LR input is their coarsest level. Gradients are accumulated into
/// `embed_grads` and, when non-null, into `decoder_grads`. `sr_psnr`, when
/// set, receives PSNR(hr, sr image).
LpsrLoss sr_loss_and_grads(const EmbedParams& embed, const LpaeParams& lpae, const Tensor& hr,
                           const LpsrLossWeights& weights, EmbedParams& embed_grads,
                           LpaeParams* decoder_grads, double* sr_psnr = nullptr);

void save_embed(const EmbedParams& embed, const std::filesystem::path& path);
EmbedParams load_embed(const std::filesystem::path& path);

struct SuperResolveReport {
  Shape input;
  Shape output;
  std::filesystem::path output_path;
  std::filesystem::path bicubic_path;
};

/// Upscales `image_path` by 2^levels and writes the result plus a repeated
/// bicubic_up2 baseline next to it (`<stem>_bicubic<ext>`).
SuperResolveReport super_resolve(const EmbedParams& embed, const LpaeParams& lpae,
                                 const std::filesystem::path& image_path,
                                 const std::filesystem::path& out_path);

Tensor bicubic_upscale(const Tensor& image, std::size_t levels);

}  // namespace lpae
