#include "lpae/sr.hpp"

#include <cmath>

#include "lpae/analysis.hpp"
#include "lpae/container.hpp"
#include "lpae/image_io.hpp"

namespace lpae {

namespace {

constexpr std::size_t kRgb = LpaeParams::kChannels;

Tensor to_rgb(const Tensor& t) {
  if (t.shape().c == kRgb) return t;
  if (t.shape().c != 1) throw DataError("super_resolve: expected 1 or 3 channels");
  return concat_channels(concat_channels(t, t), t);
}

Tensor to_channels(const Tensor& rgb, std::size_t channels) {
  if (channels == kRgb) return rgb;
  const Shape s = rgb.shape();
  Tensor out(Shape{s.n, 1, s.h, s.w});
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x)
      out.at(0, 0, y, x) = (rgb.at(0, 0, y, x) + rgb.at(0, 1, y, x) + rgb.at(0, 2, y, x)) / 3.0;
  return out;
}

}  // namespace

EmbedParams EmbedParams::zeros(std::size_t levels, std::size_t channels, std::size_t blocks) {
  if (levels < 1) throw ShapeError("EmbedParams: levels must be >= 1");
  if (channels == 0) throw ShapeError("EmbedParams: channels must be >= 1");
  EmbedParams e;
  e.levels = levels;
  e.stem.push(ConvLayer::conv3x3(kRgb, channels), true);
  for (std::size_t b = 0; b < blocks; ++b) {
    ConvChain block;
    block.push(ConvLayer::conv3x3(channels, channels), true);
    block.push(ConvLayer::conv3x3(channels, channels), false);
    e.blocks.push_back(std::move(block));
  }
  e.approx_head.push(ConvLayer::conv3x3(channels, kRgb), false);
  for (std::size_t k = 0; k < levels; ++k) {
    ConvChain head;
    for (std::size_t u = 0; u < levels - k; ++u) head.push(ConvLayer::transposed4x4(channels, channels), true);
    head.push(ConvLayer::conv3x3(channels, kRgb), false);
    e.heads.push_back(std::move(head));
  }
  return e;
}

EmbedParams EmbedParams::xavier(Rng& rng, std::size_t levels, std::size_t channels, std::size_t blocks) {
  EmbedParams e = zeros(levels, channels, blocks);
  auto init = [&rng](ConvChain& chain) {
    for (auto& layer : chain.layers) xavier_init(layer, rng);
  };
  init(e.stem);
  for (auto& b : e.blocks) init(b);
  init(e.approx_head);
  for (auto& h : e.heads) init(h);
  return e;
}

std::size_t EmbedParams::param_count() const {
  std::size_t n = stem.param_count() + approx_head.param_count();
  for (const auto& b : blocks) n += b.param_count();
  for (const auto& h : heads) n += h.param_count();
  return n;
}

EmbedParams EmbedParams::zeros_like() const {
  EmbedParams e;
  e.levels = levels;
  e.stem = stem.zeros_like();
  for (const auto& b : blocks) e.blocks.push_back(b.zeros_like());
  e.approx_head = approx_head.zeros_like();
  for (const auto& h : heads) e.heads.push_back(h.zeros_like());
  return e;
}

std::vector<ParamView> EmbedParams::params() {
  std::vector<ParamView> out;
  append_params(stem, "stem", out);
  for (std::size_t b = 0; b < blocks.size(); ++b) append_params(blocks[b], "block." + std::to_string(b), out);
  append_params(approx_head, "approx_head", out);
  for (std::size_t k = 0; k < heads.size(); ++k) append_params(heads[k], "head." + std::to_string(k), out);
  return out;
}

PyramidDecomposition embed_forward(const EmbedParams& embed, const Tensor& lr_image, EmbedTape* tape) {
  if (lr_image.shape().c != kRgb) {
    throw ShapeError("embed_forward: expected 3 channels, got " + to_string(lr_image.shape()));
  }
  if (tape) {
    tape->blocks.assign(embed.blocks.size(), GradTape{});
    tape->heads.assign(embed.heads.size(), GradTape{});
  }
  Tensor features = chain_forward(embed.stem, lr_image, tape ? &tape->stem : nullptr);
  for (std::size_t b = 0; b < embed.blocks.size(); ++b) {
    features = add(features, chain_forward(embed.blocks[b], features, tape ? &tape->blocks[b] : nullptr));
  }
  PyramidDecomposition preds;
  preds.coarsest = chain_forward(embed.approx_head, features, tape ? &tape->approx_head : nullptr);
  for (std::size_t k = 0; k < embed.heads.size(); ++k) {
    preds.details.push_back(chain_forward(embed.heads[k], features, tape ? &tape->heads[k] : nullptr));
  }
  return preds;
}

void embed_backward(const EmbedParams& embed, const EmbedTape& tape,
                    const PyramidDecomposition& grad_preds, EmbedParams& grads) {
  if (grad_preds.levels() != embed.heads.size()) {
    throw ShapeError("embed_backward: gradient level count mismatch");
  }
  Tensor g = chain_backward(embed.approx_head, tape.approx_head, grad_preds.coarsest, grads.approx_head);
  for (std::size_t k = 0; k < embed.heads.size(); ++k) {
    axpy(g, chain_backward(embed.heads[k], tape.heads[k], grad_preds.details[k], grads.heads[k]));
  }
  for (std::size_t b = embed.blocks.size(); b-- > 0;) {
    axpy(g, chain_backward(embed.blocks[b], tape.blocks[b], g, grads.blocks[b]));
  }
  chain_backward(embed.stem, tape.stem, g, grads.stem);
}

SrResult sr_forward(const EmbedParams& embed, const LpaeParams& lpae, const Tensor& lr_image,
                    PyramidDecodeTape* decode_tape, EmbedTape* embed_tape) {
  SrResult out;
  out.preds = embed_forward(embed, lr_image, embed_tape);
  out.image = decode_pyramid(lpae, out.preds, decode_tape);
  return out;
}

LpsrLoss sr_loss_and_grads(const EmbedParams& embed, const LpaeParams& lpae, const Tensor& hr,
                           const LpsrLossWeights& weights, EmbedParams& embed_grads,
                           LpaeParams* decoder_grads, double* sr_psnr) {
  PyramidDecomposition targets = encode_pyramid(lpae, hr, embed.levels);
  PyramidDecodeTape decode_tape;
  EmbedTape embed_tape;
  SrResult sr = sr_forward(embed, lpae, targets.coarsest, &decode_tape, &embed_tape);
  LpsrLoss loss = loss_lpsr(sr.preds, targets, hr, sr.image, weights);
  if (!std::isfinite(loss.total)) throw NumericError("sr training: non-finite loss");
  if (sr_psnr) *sr_psnr = psnr(hr, sr.image);

  PyramidDecomposition g = decode_pyramid_backward(lpae, decode_tape, loss.grad_recon, decoder_grads);
  axpy(g.coarsest, loss.grad_preds.coarsest);
  for (std::size_t k = 0; k < g.levels(); ++k) axpy(g.details[k], loss.grad_preds.details[k]);
  embed_backward(embed, embed_tape, g, embed_grads);
  return loss;
}

void save_embed(const EmbedParams& embed, const std::filesystem::path& path) {
  EmbedParams copy = embed;
  std::vector<NamedTensor> tensors;
  tensors.push_back(NamedTensor{"meta", {3},
                                {static_cast<double>(embed.levels), static_cast<double>(embed.channels()),
                                 static_cast<double>(embed.blocks.size())}});
  auto body = snapshot(copy.params());
  tensors.insert(tensors.end(), body.begin(), body.end());
  write_container(path, kMagicLpsr, tensors);
}

EmbedParams load_embed(const std::filesystem::path& path) {
  auto tensors = read_container(path, kMagicLpsr);
  if (tensors.empty() || tensors[0].name != "meta" || tensors[0].values.size() != 3) {
    throw DataError(path.string() + ": missing embed architecture record");
  }
  const auto& meta = tensors[0].values;
  const auto levels = static_cast<std::size_t>(meta[0]);
  const auto channels = static_cast<std::size_t>(meta[1]);
  const auto blocks = static_cast<std::size_t>(meta[2]);
  if (levels < 1 || levels > 8 || channels < 1 || channels > 1024 || blocks > 64) {
    throw DataError(path.string() + ": implausible embed architecture record");
  }
  EmbedParams e = EmbedParams::zeros(levels, channels, blocks);
  tensors.erase(tensors.begin());
  try {
    restore(tensors, e.params());
  } catch (const DataError& err) {
    throw DataError(path.string() + ": " + err.what());
  }
  return e;
}

Tensor bicubic_upscale(const Tensor& image, std::size_t levels) {
  Tensor out = image;
  for (std::size_t k = 0; k < levels; ++k) out = bicubic_up2(out);
  return out;
}

SuperResolveReport super_resolve(const EmbedParams& embed, const LpaeParams& lpae,
                                 const std::filesystem::path& image_path,
                                 const std::filesystem::path& out_path) {
  const Tensor input = load_image(image_path);
  const std::size_t channels = input.shape().c;
  const Tensor rgb = to_rgb(input);
  SrResult sr = sr_forward(embed, lpae, rgb);
  if (!sr.image.all_finite()) throw NumericError("super_resolve: non-finite output");

  SuperResolveReport report;
  report.input = input.shape();
  report.output_path = out_path;
  report.bicubic_path = out_path.parent_path() /
                        (out_path.stem().string() + "_bicubic" + out_path.extension().string());
  const Tensor result = to_channels(sr.image, channels);
  report.output = result.shape();
  save_image(result, report.output_path);
  save_image(bicubic_upscale(input, embed.levels), report.bicubic_path);
  return report;
}

}  // namespace lpae
