#include "lpae/rng.hpp"

#include <cmath>
#include <limits>

namespace lpae {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ShapeError("Rng::below: bound must be positive");
  // Largest multiple of bound representable; words at or above it are rejected.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t word = engine_();
  while (word >= limit) word = engine_();
  return word % bound;
}

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  if (fan_in == 0 || fan_out == 0) throw ShapeError("xavier_init: fan_in and fan_out must be >= 1");
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor xavier_init(Rng& rng, std::size_t fan_in, std::size_t fan_out, Shape shape) {
  const double bound = xavier_bound(fan_in, fan_out);
  Tensor t(shape);
  for (double& v : t.data()) {
    double x = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
    // float rounding may step just outside the interval
    if (x > bound) x = std::nextafter(static_cast<float>(bound), 0.0f);
    if (x < -bound) x = -static_cast<double>(std::nextafter(static_cast<float>(bound), 0.0f));
    v = x;
  }
  return t;
}

}  // namespace lpae
