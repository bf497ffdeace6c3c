#include "lpae/nn.hpp"

#include <Eigen/Core>

#include <array>

namespace lpae {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

// Per-thread im2col buffers, reused across calls.
MatMap scratch(std::size_t slot, std::size_t rows, std::size_t cols) {
  thread_local std::array<std::vector<double>, 2> buffers;
  auto& b = buffers[slot];
  if (b.size() < rows * cols) b.resize(rows * cols);
  return MatMap(b.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

// Geometry of a strided sliding window: a `channels` x in_h x in_w image
// seen through k x k windows that produce an out_h x out_w grid.
struct Window {
  std::size_t channels, in_h, in_w, k, stride, pad, out_h, out_w;

  std::size_t rows() const { return channels * k * k; }
  std::size_t cols() const { return out_h * out_w; }
};

// cols[(c*k + ky)*k + kx][oy*out_w + ox] = img[c][oy*s - p + ky][ox*s - p + kx] (0 outside)
void im2col(const double* img, const Window& g, double* cols) {
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t ky = 0; ky < g.k; ++ky)
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        double* row = cols + ((c * g.k + ky) * g.k + kx) * g.cols();
        const double* plane = img + c * g.in_h * g.in_w;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          double* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= in_h) {
            std::fill(dst, dst + g.out_w, 0.0);
            continue;
          }
          const double* src = plane + iy * in_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            dst[ox] = (ix < 0 || ix >= in_w) ? 0.0 : src[ix];
          }
        }
      }
}

// Adjoint of im2col: scatter-adds columns back into the image.
void col2im(const double* cols, const Window& g, double* img) {
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t ky = 0; ky < g.k; ++ky)
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const double* row = cols + ((c * g.k + ky) * g.k + kx) * g.cols();
        double* plane = img + c * g.in_h * g.in_w;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= in_h) continue;
          const double* src = row + oy * g.out_w;
          double* dst = plane + iy * in_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            if (ix >= 0 && ix < in_w) dst[ix] += src[ox];
          }
        }
      }
}

void check_layer(const ConvLayer& layer, const Tensor& x, LayerKind kind, const char* what) {
  if (layer.kind != kind) throw ShapeError(std::string(what) + ": wrong layer kind");
  const Shape ws = layer.weights.shape();
  if (ws.h != ws.w || ws.h == 0) throw ShapeError(std::string(what) + ": kernel must be square");
  if (layer.bias.size() != ws.n) throw ShapeError(std::string(what) + ": bias length mismatch");
  if (x.shape().c != ws.c) {
    throw ShapeError(std::string(what) + ": input has " + std::to_string(x.shape().c) +
                     " channels, layer expects " + std::to_string(ws.c));
  }
  if (x.shape().h == 0 || x.shape().w == 0) throw ShapeError(std::string(what) + ": empty input");
}

Window conv_window(const ConvLayer& layer, const Shape& in) {
  if (layer.stride > 1 && (in.h % layer.stride != 0 || in.w % layer.stride != 0)) {
    throw ShapeError("conv: spatial size " + to_string(in) + " not divisible by stride " +
                     std::to_string(layer.stride));
  }
  const std::size_t k = layer.kernel();
  if (in.h + 2 * layer.padding < k || in.w + 2 * layer.padding < k) {
    throw ShapeError("conv: input " + to_string(in) + " smaller than kernel");
  }
  return Window{in.c, in.h, in.w, k, layer.stride, layer.padding,
                layer.output_size(in.h), layer.output_size(in.w)};
}

// For a transposed layer the window runs over the *output* image and
// produces the input grid.
Window tconv_window(const ConvLayer& layer, const Shape& in) {
  return Window{layer.out_channels(), layer.output_size(in.h), layer.output_size(in.w),
                layer.kernel(), layer.stride, layer.padding, in.h, in.w};
}

// (out, in, k, k) -> rows (o, ky, kx), cols i.
RowMat tconv_matrix(const Tensor& w) {
  const Shape s = w.shape();
  RowMat m(s.n * s.h * s.w, s.c);
  for (std::size_t o = 0; o < s.n; ++o)
    for (std::size_t i = 0; i < s.c; ++i)
      for (std::size_t ky = 0; ky < s.h; ++ky)
        for (std::size_t kx = 0; kx < s.w; ++kx)
          m((o * s.h + ky) * s.w + kx, i) = w.at(o, i, ky, kx);
  return m;
}

void add_bias(Tensor& y, const std::vector<double>& bias) {
  const Shape s = y.shape();
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (double& v : y.plane(n, c)) v += bias[c];
}

std::vector<double> bias_grad(const Tensor& grad_out) {
  const Shape s = grad_out.shape();
  std::vector<double> g(s.c, 0.0);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (double v : grad_out.plane(n, c)) g[c] += v;
  return g;
}

void check_grad_out(const Tensor& grad_out, const Shape& expected, const char* what) {
  if (grad_out.shape() != expected) {
    throw ShapeError(std::string(what) + ": grad_out shape " + to_string(grad_out.shape()) +
                     " does not match forward output " + to_string(expected));
  }
}

}  // namespace

std::size_t ConvLayer::output_size(std::size_t in) const {
  const std::size_t k = kernel();
  if (kind == LayerKind::conv) return (in + 2 * padding - k) / stride + 1;
  return (in - 1) * stride + k - 2 * padding;
}

ConvLayer ConvLayer::conv3x3(std::size_t in_ch, std::size_t out_ch, std::size_t stride) {
  if (stride != 1 && stride != 2) throw ShapeError("conv3x3: stride must be 1 or 2");
  return ConvLayer{Tensor(Shape{out_ch, in_ch, 3, 3}), std::vector<double>(out_ch, 0.0), stride, 1,
                   LayerKind::conv};
}

ConvLayer ConvLayer::transposed4x4(std::size_t in_ch, std::size_t out_ch) {
  return ConvLayer{Tensor(Shape{out_ch, in_ch, 4, 4}), std::vector<double>(out_ch, 0.0), 2, 1,
                   LayerKind::transposed};
}

ConvLayer ConvLayer::zeros_like() const {
  return ConvLayer{Tensor::zeros_like(weights), std::vector<double>(bias.size(), 0.0), stride,
                   padding, kind};
}

void xavier_init(ConvLayer& layer, Rng& rng) {
  const std::size_t area = layer.kernel() * layer.kernel();
  layer.weights = xavier_init(rng, layer.in_channels() * area, layer.out_channels() * area,
                              layer.weights.shape());
  std::ranges::fill(layer.bias, 0.0);
}

Tensor conv_forward(const ConvLayer& layer, const Tensor& x) {
  check_layer(layer, x, LayerKind::conv, "conv_forward");
  const Shape in = x.shape();
  const Window g = conv_window(layer, in);
  Tensor y(Shape{in.n, layer.out_channels(), g.out_h, g.out_w});
  MatMap cols = scratch(0, g.rows(), g.cols());
  ConstMatMap w(layer.weights.data().data(), layer.out_channels(), g.rows());
  for (std::size_t n = 0; n < in.n; ++n) {
    im2col(x.data().data() + n * in.c * in.h * in.w, g, cols.data());
    MatMap out(y.data().data() + n * layer.out_channels() * g.cols(), layer.out_channels(), g.cols());
    out.noalias() = w * cols;
  }
  add_bias(y, layer.bias);
  return y;
}

ConvGrads conv_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out) {
  check_layer(layer, x, LayerKind::conv, "conv_backward");
  const Shape in = x.shape();
  const Window g = conv_window(layer, in);
  check_grad_out(grad_out, Shape{in.n, layer.out_channels(), g.out_h, g.out_w}, "conv_backward");

  ConvGrads grads{Tensor(in), Tensor::zeros_like(layer.weights), bias_grad(grad_out)};
  MatMap cols = scratch(0, g.rows(), g.cols());
  MatMap dcols = scratch(1, g.rows(), g.cols());
  ConstMatMap w(layer.weights.data().data(), layer.out_channels(), g.rows());
  MatMap dw(grads.weights.data().data(), layer.out_channels(), g.rows());
  for (std::size_t n = 0; n < in.n; ++n) {
    ConstMatMap dy(grad_out.data().data() + n * layer.out_channels() * g.cols(),
                   layer.out_channels(), g.cols());
    im2col(x.data().data() + n * in.c * in.h * in.w, g, cols.data());
    dw.noalias() += dy * cols.transpose();
    dcols.noalias() = w.transpose() * dy;
    col2im(dcols.data(), g, grads.input.data().data() + n * in.c * in.h * in.w);
  }
  return grads;
}

Tensor tconv_forward(const ConvLayer& layer, const Tensor& x) {
  check_layer(layer, x, LayerKind::transposed, "tconv_forward");
  const Shape in = x.shape();
  const Window g = tconv_window(layer, in);
  Tensor y(Shape{in.n, layer.out_channels(), g.in_h, g.in_w});
  const RowMat wt = tconv_matrix(layer.weights);
  MatMap cols = scratch(0, g.rows(), g.cols());
  const std::size_t out_len = g.channels * g.in_h * g.in_w;
  for (std::size_t n = 0; n < in.n; ++n) {
    ConstMatMap xm(x.data().data() + n * in.c * in.h * in.w, in.c, g.cols());
    cols.noalias() = wt * xm;
    col2im(cols.data(), g, y.data().data() + n * out_len);
  }
  add_bias(y, layer.bias);
  return y;
}

ConvGrads tconv_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out) {
  check_layer(layer, x, LayerKind::transposed, "tconv_backward");
  const Shape in = x.shape();
  const Window g = tconv_window(layer, in);
  check_grad_out(grad_out, Shape{in.n, layer.out_channels(), g.in_h, g.in_w}, "tconv_backward");

  ConvGrads grads{Tensor(in), Tensor::zeros_like(layer.weights), bias_grad(grad_out)};
  const RowMat wt = tconv_matrix(layer.weights);
  RowMat dwt = RowMat::Zero(wt.rows(), wt.cols());
  MatMap dcols = scratch(1, g.rows(), g.cols());
  const std::size_t out_len = g.channels * g.in_h * g.in_w;
  for (std::size_t n = 0; n < in.n; ++n) {
    im2col(grad_out.data().data() + n * out_len, g, dcols.data());
    ConstMatMap xm(x.data().data() + n * in.c * in.h * in.w, in.c, g.cols());
    MatMap dx(grads.input.data().data() + n * in.c * in.h * in.w, in.c, g.cols());
    dx.noalias() = wt.transpose() * dcols;
    dwt.noalias() += dcols * xm.transpose();
  }
  const Shape ws = layer.weights.shape();
  for (std::size_t o = 0; o < ws.n; ++o)
    for (std::size_t i = 0; i < ws.c; ++i)
      for (std::size_t ky = 0; ky < ws.h; ++ky)
        for (std::size_t kx = 0; kx < ws.w; ++kx)
          grads.weights.at(o, i, ky, kx) = dwt((o * ws.h + ky) * ws.w + kx, i);
  return grads;
}

Tensor layer_forward(const ConvLayer& layer, const Tensor& x) {
  return layer.kind == LayerKind::conv ? conv_forward(layer, x) : tconv_forward(layer, x);
}

ConvGrads layer_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out) {
  return layer.kind == LayerKind::conv ? conv_backward(layer, x, grad_out)
                                       : tconv_backward(layer, x, grad_out);
}

Tensor relu_forward(const Tensor& x) {
  Tensor y(x.shape());
  auto src = x.data();
  auto dst = y.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  require_same_shape(x, grad_out, "relu_backward");
  Tensor g(x.shape());
  auto src = x.data();
  auto dy = grad_out.data();
  auto dst = g.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? dy[i] : 0.0;
  return g;
}

void accumulate(ConvLayer& grad, const ConvGrads& g) {
  axpy(grad.weights, g.weights);
  for (std::size_t i = 0; i < grad.bias.size(); ++i) grad.bias[i] += g.bias[i];
}

void ConvChain::push(ConvLayer layer, bool with_relu) {
  layers.push_back(std::move(layer));
  relu.push_back(with_relu);
}

std::size_t ConvChain::param_count() const {
  std::size_t total = 0;
  for (const auto& l : layers) total += l.param_count();
  return total;
}

ConvChain ConvChain::zeros_like() const {
  ConvChain z;
  for (std::size_t i = 0; i < layers.size(); ++i) z.push(layers[i].zeros_like(), relu[i]);
  return z;
}

Tensor chain_forward(const ConvChain& chain, const Tensor& x, GradTape* tape) {
  if (tape) {
    tape->inputs.clear();
    tape->pre_activation.clear();
  }
  Tensor current = x;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    Tensor out = layer_forward(chain.layers[i], current);
    if (tape) {
      tape->inputs.push_back(std::move(current));
      if (chain.relu[i]) tape->pre_activation.push_back(out);
      else tape->pre_activation.emplace_back();
    }
    current = chain.relu[i] ? relu_forward(out) : std::move(out);
  }
  return current;
}

Tensor chain_backward(const ConvChain& chain, const GradTape& tape, const Tensor& grad_out,
                      ConvChain& grads) {
  if (tape.inputs.size() != chain.size() || grads.size() != chain.size()) {
    throw ShapeError("chain_backward: tape or gradient buffer does not match the chain");
  }
  Tensor g = grad_out;
  for (std::size_t i = chain.size(); i-- > 0;) {
    if (chain.relu[i]) g = relu_backward(tape.pre_activation[i], g);
    ConvGrads lg = layer_backward(chain.layers[i], tape.inputs[i], g);
    accumulate(grads.layers[i], lg);
    g = std::move(lg.input);
  }
  return g;
}

void append_params(ConvLayer& layer, const std::string& prefix, std::vector<ParamView>& out) {
  const Shape s = layer.weights.shape();
  out.push_back(ParamView{prefix + ".weight", layer.weights.data(), {s.n, s.c, s.h, s.w}, true});
  out.push_back(ParamView{prefix + ".bias", layer.bias, {layer.bias.size()}, false});
}

void append_params(ConvChain& chain, const std::string& prefix, std::vector<ParamView>& out) {
  for (std::size_t i = 0; i < chain.size(); ++i)
    append_params(chain.layers[i], prefix + "." + std::to_string(i), out);
}

}  // namespace lpae
