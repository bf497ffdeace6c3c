#pragma once

#include <cstdint>
#include <random>

#include "lpae/tensor.hpp"

namespace lpae {

/// Reproducible random stream.
///
/// The engine is the 64-bit Mersenne Twister (MT19937-64), whose output
/// sequence is fixed bit-for-bit by the C++ standard for a given seed. The
/// standard distributions are implementation-defined, so every derived draw
/// is computed here from raw 64-bit words:
///   uniform()      = (word >> 11) * 2^-53                  in [0, 1)
///   below(bound)   = rejection sampling on word % bound     in [0, bound)
///   coin()         = word >> 63
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t bound);
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Uniform Xavier/Glorot initialisation in [-sqrt(6/(fan_in+fan_out)), +...].
///
/// Samples are rounded to single precision so that freshly initialised
/// parameters survive the f32 checkpoint container unchanged.
Tensor xavier_init(Rng& rng, std::size_t fan_in, std::size_t fan_out, Shape shape);

double xavier_bound(std::size_t fan_in, std::size_t fan_out);

}  // namespace lpae
