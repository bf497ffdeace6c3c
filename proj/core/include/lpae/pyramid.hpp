#pragma once

#include <vector>

#include "lpae/tensor.hpp"

namespace lpae {

/// Band-pass details plus the coarsest approximation.
///
/// details[0] has the input resolution; each following level halves it.
/// `coarsest` is the input size divided by 2^K, where K = details.size().
struct PyramidDecomposition {
  std::vector<Tensor> details;
  Tensor coarsest;

  std::size_t levels() const { return details.size(); }
};

/// Index of a symmetric reflection that does not repeat the edge sample
/// (-1 -> 1, n -> n - 2). Valid for any offset and any n >= 1.
std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n);

/// Burt-Adelson reduce: 5-tap binomial [1 4 6 4 1]/16 low-pass per axis,
/// then keep even samples. Requires even height and width.
Tensor lp_reduce(const Tensor& x);

/// Zero-insertion 2x upsampling followed by the binomial kernel scaled by 2
/// per axis. Reproduces constants exactly.
Tensor lp_expand(const Tensor& x);

PyramidDecomposition lp_build(const Tensor& image, std::size_t levels);
Tensor lp_collapse(const PyramidDecomposition& pyramid);

/// Keys cubic convolution weight with a = -0.5.
double keys_cubic(double t);

/// Bicubic 2x resampling on the half-pixel grid (pixel centres at
/// (i + 0.5) / N, no antialiasing), reflected borders.
Tensor bicubic_down2(const Tensor& x);
Tensor bicubic_up2(const Tensor& x);

}  // namespace lpae
