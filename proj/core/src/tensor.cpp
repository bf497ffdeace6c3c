#include "lpae/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lpae {

std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << '(' << s.n << ',' << s.c << ',' << s.h << ',' << s.w << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + to_string(shape_));
  }
}

Tensor Tensor::from(Shape shape, std::initializer_list<double> values) {
  return Tensor(shape, std::vector<double>(values));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

namespace {

template <typename Op>
Tensor zip(const Tensor& a, const Tensor& b, const char* what, Op op) {
  require_same_shape(a, b, what);
  Tensor out(a.shape());
  auto x = a.data();
  auto y = b.data();
  auto z = out.data();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = op(x[i], y[i]);
  return out;
}

template <typename Op>
Tensor map(const Tensor& a, Op op) {
  Tensor out(a.shape());
  auto x = a.data();
  auto z = out.data();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = op(x[i]);
  return out;
}

void require_nonempty(const Tensor& a, const char* what) {
  if (a.empty()) throw ShapeError(std::string(what) + ": empty tensor " + to_string(a.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, "sub", [](double x, double y) { return x - y; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return zip(a, b, "mul", [](double x, double y) { return x * y; });
}
Tensor scale(const Tensor& a, double s) {
  return map(a, [s](double x) { return x * s; });
}
Tensor add_scalar(const Tensor& a, double s) {
  return map(a, [s](double x) { return x + s; });
}

void axpy(Tensor& a, const Tensor& b, double s) {
  require_same_shape(a, b, "axpy");
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * y[i];
}

double sum(const Tensor& a) {
  require_nonempty(a, "sum");
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return acc;
}

double mean(const Tensor& a) {
  require_nonempty(a, "mean");
  return sum(a) / static_cast<double>(a.numel());
}

double sum_sq(const Tensor& a) {
  require_nonempty(a, "sum_sq");
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return acc;
}

double sum_abs(const Tensor& a) {
  require_nonempty(a, "sum_abs");
  double acc = 0.0;
  for (double v : a.data()) acc += std::abs(v);
  return acc;
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  const Shape sa = a.shape();
  const Shape sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    throw ShapeError("concat_channels: incompatible shapes " + to_string(sa) + " and " +
                     to_string(sb));
  }
  Tensor out(Shape{sa.n, sa.c + sb.c, sa.h, sa.w});
  for (std::size_t n = 0; n < sa.n; ++n) {
    for (std::size_t c = 0; c < sa.c; ++c) std::ranges::copy(a.plane(n, c), out.plane(n, c).begin());
    for (std::size_t c = 0; c < sb.c; ++c)
      std::ranges::copy(b.plane(n, c), out.plane(n, sa.c + c).begin());
  }
  return out;
}

Tensor slice_channels(const Tensor& a, std::size_t begin, std::size_t count) {
  const Shape s = a.shape();
  if (begin + count > s.c) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + to_string(s));
  }
  Tensor out(Shape{s.n, count, s.h, s.w});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < count; ++c)
      std::ranges::copy(a.plane(n, begin + c), out.plane(n, c).begin());
  return out;
}

Tensor batch_item(const Tensor& a, std::size_t i) {
  const Shape s = a.shape();
  if (i >= s.n) throw ShapeError("batch_item: index out of range for " + to_string(s));
  const std::size_t len = s.c * s.h * s.w;
  auto src = a.data().subspan(i * len, len);
  return Tensor(Shape{1, s.c, s.h, s.w}, std::vector<double>(src.begin(), src.end()));
}

Tensor stack_batch(const std::vector<Tensor>& items) {
  if (items.empty()) throw ShapeError("stack_batch: no items");
  const Shape s = items.front().shape();
  std::vector<double> data;
  data.reserve(items.size() * s.numel());
  std::size_t n = 0;
  for (const auto& t : items) {
    const Shape ts = t.shape();
    if (ts.c != s.c || ts.h != s.h || ts.w != s.w) {
      throw ShapeError("stack_batch: mismatched item shape " + to_string(ts));
    }
    data.insert(data.end(), t.data().begin(), t.data().end());
    n += ts.n;
  }
  return Tensor(Shape{n, s.c, s.h, s.w}, std::move(data));
}

Tensor nearest_up2(const Tensor& a) {
  const Shape s = a.shape();
  Tensor out(Shape{s.n, s.c, 2 * s.h, 2 * s.w});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < 2 * s.h; ++y)
        for (std::size_t x = 0; x < 2 * s.w; ++x) out.at(n, c, y, x) = a.at(n, c, y / 2, x / 2);
  return out;
}

Tensor nearest_up2_adjoint(const Tensor& g) {
  const Shape s = g.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw ShapeError("nearest_up2_adjoint: odd spatial size " + to_string(s));
  }
  Tensor out(Shape{s.n, s.c, s.h / 2, s.w / 2});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x) out.at(n, c, y / 2, x / 2) += g.at(n, c, y, x);
  return out;
}

Tensor crop(const Tensor& a, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) {
  const Shape s = a.shape();
  if (y0 + h > s.h || x0 + w > s.w) {
    throw ShapeError("crop: window exceeds " + to_string(s));
  }
  Tensor out(Shape{s.n, s.c, h, w});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) out.at(n, c, y, x) = a.at(n, c, y0 + y, x0 + x);
  return out;
}

Tensor flip_horizontal(const Tensor& a) {
  const Shape s = a.shape();
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x) out.at(n, c, y, x) = a.at(n, c, y, s.w - 1 - x);
  return out;
}

Tensor flip_vertical(const Tensor& a) {
  const Shape s = a.shape();
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x) out.at(n, c, y, x) = a.at(n, c, s.h - 1 - y, x);
  return out;
}

}  // namespace lpae
