#include "lpae/model.hpp"

#include "lpae/container.hpp"

namespace lpae {

namespace {

constexpr std::size_t C = LpaeParams::kChannels;
constexpr std::size_t W = LpaeParams::kWidth;

void require_rgb_even(const Tensor& image, const char* what) {
  const Shape s = image.shape();
  if (s.c != C) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(C) + " channels, got " +
                     to_string(s));
  }
  if (s.h == 0 || s.w == 0 || s.h % 2 != 0 || s.w % 2 != 0) {
    throw ShapeError(std::string(what) + ": spatial size must be even and non-zero, got " +
                     to_string(s));
  }
}

}  // namespace

LpaeParams LpaeParams::zeros() {
  LpaeParams p;
  p.approx.push(ConvLayer::conv3x3(C, W, 2), true);
  p.approx.push(ConvLayer::conv3x3(W, W), true);
  p.approx.push(ConvLayer::conv3x3(W, W), true);
  p.approx.push(ConvLayer::conv3x3(W, C), false);

  p.detail.push(ConvLayer::conv3x3(2 * C, W), true);
  p.detail.push(ConvLayer::conv3x3(W, W), true);
  p.detail.push(ConvLayer::conv3x3(W, W), true);
  p.detail.push(ConvLayer::conv3x3(W, C), false);

  p.decoder.push(ConvLayer::transposed4x4(C, W), true);
  p.decoder.push(ConvLayer::conv3x3(W, W), true);
  p.decoder.push(ConvLayer::conv3x3(W, W), true);
  p.decoder.push(ConvLayer::conv3x3(W, C), false);
  return p;
}

LpaeParams LpaeParams::xavier(Rng& rng) {
  LpaeParams p = zeros();
  for (ConvChain* chain : {&p.approx, &p.detail, &p.decoder})
    for (auto& layer : chain->layers) xavier_init(layer, rng);
  return p;
}

std::size_t LpaeParams::param_count() const {
  return approx.param_count() + detail.param_count() + decoder.param_count();
}

LpaeParams LpaeParams::zeros_like() const {
  return LpaeParams{approx.zeros_like(), detail.zeros_like(), decoder.zeros_like()};
}

std::vector<ParamView> LpaeParams::params() {
  std::vector<ParamView> out;
  append_params(approx, "approx", out);
  append_params(detail, "detail", out);
  append_params(decoder, "decoder", out);
  return out;
}

std::vector<ParamView> LpaeParams::decoder_params() {
  std::vector<ParamView> out;
  append_params(decoder, "decoder", out);
  return out;
}

Encoded encode(const LpaeParams& params, const Tensor& image, LpaeTape* tape) {
  require_rgb_even(image, "encode");
  Tensor approx = chain_forward(params.approx, image, tape ? &tape->approx : nullptr);
  Tensor detail_in = concat_channels(image, nearest_up2(approx));
  Tensor detail = chain_forward(params.detail, detail_in, tape ? &tape->detail : nullptr);
  return Encoded{std::move(approx), std::move(detail)};
}

Tensor predict(const LpaeParams& params, const Tensor& approx, GradTape* tape) {
  if (approx.shape().c != C) throw ShapeError("decode: approximation must have 3 channels");
  return chain_forward(params.decoder, approx, tape);
}

Tensor decode(const LpaeParams& params, const Tensor& approx, const Tensor& detail, GradTape* tape) {
  const Shape a = approx.shape();
  const Shape d = detail.shape();
  if (d.n != a.n || d.c != a.c || d.h != 2 * a.h || d.w != 2 * a.w) {
    throw ShapeError("decode: detail " + to_string(d) + " must be twice the size of approximation " +
                     to_string(a));
  }
  return add(detail, predict(params, approx, tape));
}

LpaeOutput lpae_forward(const LpaeParams& params, const Tensor& image, LpaeTape* tape) {
  Encoded enc = encode(params, image, tape);
  Tensor prediction = predict(params, enc.approx, tape ? &tape->decoder : nullptr);
  Tensor recon = add(enc.detail, prediction);
  return LpaeOutput{std::move(enc.approx), std::move(enc.detail), std::move(prediction),
                    std::move(recon)};
}

void lpae_backward(const LpaeParams& params, const LpaeTape& tape, const LpaeOutputGrads& g,
                   LpaeParams& grads) {
  // I' = I_d + phi(I_c): the reconstruction gradient reaches both terms unchanged.
  Tensor grad_detail = add(g.detail, g.recon);
  Tensor grad_approx = g.approx;
  axpy(grad_approx, chain_backward(params.decoder, tape.decoder, g.recon, grads.decoder));

  Tensor grad_detail_in = chain_backward(params.detail, tape.detail, grad_detail, grads.detail);
  axpy(grad_approx, nearest_up2_adjoint(slice_channels(grad_detail_in, C, C)));

  chain_backward(params.approx, tape.approx, grad_approx, grads.approx);
}

void require_pyramid_divisible(const Shape& s, std::size_t levels) {
  if (levels == 0) throw ShapeError("pyramid depth must be >= 1");
  const std::size_t div = std::size_t{1} << levels;
  if (s.h == 0 || s.w == 0 || s.h % div != 0 || s.w % div != 0) {
    throw ShapeError("spatial size " + std::to_string(s.h) + "x" + std::to_string(s.w) +
                     " must be divisible by " + std::to_string(div) + " for " +
                     std::to_string(levels) + " pyramid levels");
  }
}

PyramidDecomposition encode_pyramid(const LpaeParams& params, const Tensor& image, std::size_t levels) {
  require_pyramid_divisible(image.shape(), levels);
  PyramidDecomposition p;
  Tensor current = image;
  for (std::size_t k = 0; k < levels; ++k) {
    Encoded enc = encode(params, current);
    p.details.push_back(std::move(enc.detail));
    current = std::move(enc.approx);
  }
  p.coarsest = std::move(current);
  return p;
}

Tensor decode_pyramid(const LpaeParams& params, const PyramidDecomposition& pyramid,
                      PyramidDecodeTape* tape) {
  if (pyramid.details.empty()) throw ShapeError("decode_pyramid: no levels");
  if (tape) tape->levels.assign(pyramid.levels(), GradTape{});
  Tensor current = pyramid.coarsest;
  for (std::size_t k = pyramid.levels(); k-- > 0;) {
    current = decode(params, current, pyramid.details[k], tape ? &tape->levels[k] : nullptr);
  }
  return current;
}

PyramidDecomposition decode_pyramid_backward(const LpaeParams& params, const PyramidDecodeTape& tape,
                                             const Tensor& grad_out, LpaeParams* decoder_grads) {
  const std::size_t levels = tape.levels.size();
  PyramidDecomposition grads;
  grads.details.resize(levels);
  ConvChain scratch;
  ConvChain& pgrads = decoder_grads ? decoder_grads->decoder : (scratch = params.decoder.zeros_like());
  Tensor g = grad_out;
  for (std::size_t k = 0; k < levels; ++k) {
    grads.details[k] = g;
    g = chain_backward(params.decoder, tape.levels[k], g, pgrads);
  }
  grads.coarsest = std::move(g);
  return grads;
}

void save_checkpoint(const LpaeParams& params, const std::filesystem::path& path) {
  LpaeParams copy = params;
  write_container(path, kMagicLpae, snapshot(copy.params()));
}

LpaeParams load_checkpoint(const std::filesystem::path& path) {
  LpaeParams p = LpaeParams::zeros();
  auto tensors = read_container(path, kMagicLpae);
  try {
    restore(tensors, p.params());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return p;
}

}  // namespace lpae
