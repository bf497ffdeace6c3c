#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "lpae/error.hpp"

namespace lpae {

/// Extents of a rank-4 tensor in (batch, channel, height, width) order.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Dense rank-4 array of doubles stored row-major in (n, c, h, w) order.
///
/// This is the single value type shared by every module: images, feature
/// maps, convolution weights (out, in, kh, kw) and gradients.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);
  Tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
      : Tensor(Shape{n, c, h, w}, fill) {}

  static Tensor zeros(Shape shape) { return Tensor(shape); }
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }
  static Tensor from(Shape shape, std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[index(n, c, h, w)];
  }
  double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[index(n, c, h, w)];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Contiguous (h, w) plane for one (batch, channel) pair.
  std::span<double> plane(std::size_t n, std::size_t c) {
    return std::span<double>(data_).subspan(index(n, c, 0, 0), shape_.plane());
  }
  std::span<const double> plane(std::size_t n, std::size_t c) const {
    return std::span<const double>(data_).subspan(index(n, c, 0, 0), shape_.plane());
  }

  void fill(double v);
  bool all_finite() const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

// Elementwise arithmetic. Tensor-tensor forms require identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

// In-place accumulate: a += s * b.
void axpy(Tensor& a, const Tensor& b, double s = 1.0);

// Reductions over every element; empty tensors are rejected.
double sum(const Tensor& a);
double mean(const Tensor& a);
double sum_sq(const Tensor& a);
double sum_abs(const Tensor& a);
double max_abs(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

// Channel-wise layout helpers used by the model wiring.
Tensor concat_channels(const Tensor& a, const Tensor& b);
/// Splits off channels [begin, begin + count).
Tensor slice_channels(const Tensor& a, std::size_t begin, std::size_t count);
/// Batch item `i` as a (1, c, h, w) tensor.
Tensor batch_item(const Tensor& a, std::size_t i);
Tensor stack_batch(const std::vector<Tensor>& items);

/// Nearest-neighbour 2x upsampling and its adjoint (2x2 block sums).
Tensor nearest_up2(const Tensor& a);
Tensor nearest_up2_adjoint(const Tensor& g);

/// Spatial crop [y0, y0 + h) x [x0, x0 + w).
Tensor crop(const Tensor& a, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w);
Tensor flip_horizontal(const Tensor& a);
Tensor flip_vertical(const Tensor& a);

}  // namespace lpae
