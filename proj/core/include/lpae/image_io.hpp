#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lpae/rng.hpp"
#include "lpae/tensor.hpp"

namespace lpae {

/// 8-bit image as decoded from a binary PGM (P5, 1 channel) or PPM (P6, 3 channels).
struct ImageFile {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> pixels;  // interleaved, row-major
};

ImageFile read_pnm(const std::filesystem::path& path);
ImageFile decode_pnm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pnm(const ImageFile& img);
void write_pnm(const ImageFile& img, const std::filesystem::path& path);

/// Clamp to [0,1] and quantise with round-half-up: byte = floor(v * 255 + 0.5).
std::uint8_t quantize(double v);

Tensor image_to_tensor(const ImageFile& img);
ImageFile tensor_to_image(const Tensor& t);

/// Loads a P5/P6 file as a (1, c, h, w) tensor with values pixel / 255.
Tensor load_image(const std::filesystem::path& path);
/// Writes a (1, 1|3, h, w) tensor as P5/P6 after clamping and quantisation.
void save_image(const Tensor& t, const std::filesystem::path& path);

struct SampleConfig {
  std::size_t crop_size = 64;
  bool flip_h = true;
  bool flip_v = true;
  std::size_t batch = 4;
};

/// Decoded training images; all must share one channel count.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Tensor> images);

  /// Every .ppm/.pgm file in `dir`, in lexicographic path order.
  static Corpus from_directory(const std::filesystem::path& dir);

  const std::vector<Tensor>& images() const { return images_; }
  std::size_t size() const { return images_.size(); }
  bool empty() const { return images_.empty(); }
  std::size_t channels() const;
  std::size_t min_side() const;

 private:
  std::vector<Tensor> images_;
};

/// Draws `cfg.batch` random crops. Each sample independently picks an image,
/// a uniformly placed crop origin, and each enabled flip with probability 1/2.
Tensor sample_batch(const Corpus& corpus, const SampleConfig& cfg, Rng& rng);

/// Textured test image: a colour gradient plus sinusoidal gratings and
/// filled rectangles, values in [0,1]. Shape (1, channels, size, size).
Tensor synthetic_image(Rng& rng, std::size_t size, std::size_t channels = 3);

/// Writes `count` synthetic PPMs named synth_000.ppm, ... into `dir`.
std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          std::size_t count, std::size_t size,
                                                          std::uint64_t seed);

}  // namespace lpae
