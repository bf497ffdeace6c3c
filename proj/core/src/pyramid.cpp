#include "lpae/pyramid.hpp"

#include <array>
#include <cmath>

namespace lpae {

namespace {

constexpr std::array<double, 5> kBinomial = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

// Applies a 1-D operator `fn(src_line, dst_line)` along the width axis
// of every row, producing rows of length `out_w`.
template <typename Fn>
Tensor along_rows(const Tensor& x, std::size_t out_w, Fn fn) {
  const Shape s = x.shape();
  Tensor out(Shape{s.n, s.c, s.h, out_w});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c) {
      auto src = x.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t y = 0; y < s.h; ++y) {
        fn(src.subspan(y * s.w, s.w), dst.subspan(y * out_w, out_w));
      }
    }
  return out;
}

Tensor transpose_hw(const Tensor& x) {
  const Shape s = x.shape();
  Tensor out(Shape{s.n, s.c, s.w, s.h});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x0 = 0; x0 < s.w; ++x0) out.at(n, c, x0, y) = x.at(n, c, y, x0);
  return out;
}

// Runs the same 1-D operator over rows, then over columns.
template <typename Fn>
Tensor separable(const Tensor& x, std::size_t out_h, std::size_t out_w, Fn fn) {
  Tensor rows = along_rows(x, out_w, fn);
  Tensor cols = along_rows(transpose_hw(rows), out_h, fn);
  return transpose_hw(cols);
}

void reduce_line(std::span<const double> in, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto centre = static_cast<std::ptrdiff_t>(2 * i);
    double acc = 0.0;
    for (std::ptrdiff_t t = -2; t <= 2; ++t) acc += kBinomial[t + 2] * in[reflect_index(centre + t, n)];
    out[i] = acc;
  }
}

void expand_line(std::span<const double> in, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  for (std::ptrdiff_t m = 0; m < n; ++m) {
    double acc = 0.0;
    for (std::ptrdiff_t t = -2; t <= 2; ++t) {
      const std::ptrdiff_t p = reflect_index(m + t, n);
      if (p % 2 == 0) acc += kBinomial[t + 2] * in[p / 2];
    }
    out[m] = 2.0 * acc;
  }
}

// 4-tap cubic interpolation at source coordinate `pos` on the half-pixel grid.
double cubic_sample(std::span<const double> in, double pos) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  const double base = std::floor(pos);
  const double t = pos - base;
  const auto i0 = static_cast<std::ptrdiff_t>(base);
  return keys_cubic(1.0 + t) * in[reflect_index(i0 - 1, n)] +
         keys_cubic(t) * in[reflect_index(i0, n)] +
         keys_cubic(1.0 - t) * in[reflect_index(i0 + 1, n)] +
         keys_cubic(2.0 - t) * in[reflect_index(i0 + 2, n)];
}

void require_nonzero(const Tensor& x, const char* what) {
  if (x.shape().h == 0 || x.shape().w == 0 || x.empty()) {
    throw ShapeError(std::string(what) + ": zero-sized input " + to_string(x.shape()));
  }
}

void require_even(const Tensor& x, const char* what) {
  require_nonzero(x, what);
  if (x.shape().h % 2 != 0 || x.shape().w % 2 != 0) {
    throw ShapeError(std::string(what) + ": spatial size must be even, got " + to_string(x.shape()));
  }
}

}  // namespace

std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n <= 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Tensor lp_reduce(const Tensor& x) {
  require_even(x, "lp_reduce");
  return separable(x, x.shape().h / 2, x.shape().w / 2, reduce_line);
}

Tensor lp_expand(const Tensor& x) {
  require_nonzero(x, "lp_expand");
  return separable(x, 2 * x.shape().h, 2 * x.shape().w, expand_line);
}

PyramidDecomposition lp_build(const Tensor& image, std::size_t levels) {
  if (levels == 0) throw ShapeError("lp_build: levels must be >= 1");
  const std::size_t div = std::size_t{1} << levels;
  const Shape s = image.shape();
  if (s.h == 0 || s.w == 0 || s.h % div != 0 || s.w % div != 0) {
    throw ShapeError("lp_build: spatial size " + to_string(s) + " must be divisible by " +
                     std::to_string(div) + " for " + std::to_string(levels) + " levels");
  }
  PyramidDecomposition p;
  Tensor current = image;
  for (std::size_t k = 0; k < levels; ++k) {
    Tensor next = lp_reduce(current);
    p.details.push_back(sub(current, lp_expand(next)));
    current = std::move(next);
  }
  p.coarsest = std::move(current);
  return p;
}

Tensor lp_collapse(const PyramidDecomposition& pyramid) {
  if (pyramid.details.empty()) throw ShapeError("lp_collapse: pyramid has no levels");
  Tensor current = pyramid.coarsest;
  for (std::size_t k = pyramid.details.size(); k-- > 0;) {
    const Tensor& d = pyramid.details[k];
    const Shape cs = current.shape();
    const Shape ds = d.shape();
    if (ds.n != cs.n || ds.c != cs.c || ds.h != 2 * cs.h || ds.w != 2 * cs.w) {
      throw ShapeError("lp_collapse: level " + std::to_string(k + 1) + " has shape " +
                       to_string(ds) + " but the level below is " + to_string(cs));
    }
    current = add(d, lp_expand(current));
  }
  return current;
}

double keys_cubic(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

Tensor bicubic_down2(const Tensor& x) {
  require_even(x, "bicubic_down2");
  return separable(x, x.shape().h / 2, x.shape().w / 2,
                   [](std::span<const double> in, std::span<double> out) {
                     for (std::size_t i = 0; i < out.size(); ++i)
                       out[i] = cubic_sample(in, 2.0 * static_cast<double>(i) + 0.5);
                   });
}

Tensor bicubic_up2(const Tensor& x) {
  require_nonzero(x, "bicubic_up2");
  return separable(x, 2 * x.shape().h, 2 * x.shape().w,
                   [](std::span<const double> in, std::span<double> out) {
                     for (std::size_t i = 0; i < out.size(); ++i)
                       out[i] = cubic_sample(in, 0.5 * static_cast<double>(i) - 0.25);
                   });
}

}  // namespace lpae
