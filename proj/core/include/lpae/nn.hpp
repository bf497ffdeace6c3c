#pragma once

#include <span>
#include <string>
#include <vector>

#include "lpae/rng.hpp"
#include "lpae/tensor.hpp"

namespace lpae {

enum class LayerKind { conv, transposed };

/// A 2-D convolution or transposed convolution with square kernels.
///
/// Weights are (out_ch, in_ch, k, k) for both kinds. "Convolution" means
/// cross-correlation with zero padding. For a transposed layer the input
/// pixel (iy, ix) scatters into output (iy * stride - padding + ky, ...).
struct ConvLayer {
  Tensor weights;
  std::vector<double> bias;
  std::size_t stride = 1;
  std::size_t padding = 1;
  LayerKind kind = LayerKind::conv;

  std::size_t out_channels() const { return weights.shape().n; }
  std::size_t in_channels() const { return weights.shape().c; }
  std::size_t kernel() const { return weights.shape().h; }
  std::size_t param_count() const { return weights.numel() + bias.size(); }

  /// Output spatial size for an input of height/width `in`.
  std::size_t output_size(std::size_t in) const;

  /// 3x3, padding 1, zero-initialised.
  static ConvLayer conv3x3(std::size_t in_ch, std::size_t out_ch, std::size_t stride = 1);
  /// 4x4, stride 2, padding 1: output is exactly twice the input size.
  static ConvLayer transposed4x4(std::size_t in_ch, std::size_t out_ch);

  /// Same geometry with all weights and biases zero (used for gradient buffers).
  ConvLayer zeros_like() const;
};

/// Xavier-uniform weights (fan_in = in_ch*k*k, fan_out = out_ch*k*k), zero bias.
void xavier_init(ConvLayer& layer, Rng& rng);

struct ConvGrads {
  Tensor input;
  Tensor weights;
  std::vector<double> bias;
};

Tensor conv_forward(const ConvLayer& layer, const Tensor& x);
ConvGrads conv_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out);

Tensor tconv_forward(const ConvLayer& layer, const Tensor& x);
ConvGrads tconv_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out);

/// Dispatch on `layer.kind`.
Tensor layer_forward(const ConvLayer& layer, const Tensor& x);
ConvGrads layer_backward(const ConvLayer& layer, const Tensor& x, const Tensor& grad_out);

Tensor relu_forward(const Tensor& x);
/// Passes gradient where x > 0; zero at x <= 0.
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

/// grad += g (weights and bias).
void accumulate(ConvLayer& grad, const ConvGrads& g);

/// A feed-forward run of layers, each optionally followed by ReLU.
struct ConvChain {
  std::vector<ConvLayer> layers;
  std::vector<bool> relu;

  void push(ConvLayer layer, bool with_relu);
  std::size_t size() const { return layers.size(); }
  std::size_t param_count() const;
  ConvChain zeros_like() const;
};

/// Activations recorded by `chain_forward` for the matching backward call.
struct GradTape {
  std::vector<Tensor> inputs;       // input to layer i
  std::vector<Tensor> pre_activation;  // layer i output before ReLU
};

Tensor chain_forward(const ConvChain& chain, const Tensor& x, GradTape* tape = nullptr);

/// Backpropagates through a recorded forward pass. Parameter gradients are
/// added into `grads` (same structure as `chain`); returns d(loss)/d(input).
Tensor chain_backward(const ConvChain& chain, const GradTape& tape, const Tensor& grad_out,
                      ConvChain& grads);

/// Mutable flat view of one parameter tensor, used by optimisers and checkpoints.
struct ParamView {
  std::string name;
  std::span<double> values;
  std::vector<std::size_t> dims;
  bool decay = true;  // weight decay applies to weights, not biases
};

void append_params(ConvLayer& layer, const std::string& prefix, std::vector<ParamView>& out);
void append_params(ConvChain& chain, const std::string& prefix, std::vector<ParamView>& out);

}  // namespace lpae
