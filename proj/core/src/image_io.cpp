#include "lpae/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

namespace lpae {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char ch = static_cast<char>(bytes_[pos_]);
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* field) {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 24)) throw DataError(std::string("pnm: ") + field + " too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw DataError(std::string("pnm: malformed header, expected ") + field);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw DataError("pnm: malformed header, missing whitespace before raster");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

ImageFile decode_pnm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw DataError("pnm: unsupported magic (expected binary P5 or P6)");
  }
  ImageFile img;
  img.channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader reader(bytes);
  reader.advance(2);
  img.width = reader.number("width");
  img.height = reader.number("height");
  const std::size_t maxval = reader.number("maxval");
  if (maxval != 255) throw DataError("pnm: unsupported maxval " + std::to_string(maxval));
  if (img.width == 0 || img.height == 0) throw DataError("pnm: zero image dimension");
  reader.single_space();
  const std::size_t need = img.width * img.height * img.channels;
  if (bytes.size() - reader.pos() < need) {
    throw DataError("pnm: truncated payload (" + std::to_string(bytes.size() - reader.pos()) +
                    " of " + std::to_string(need) + " bytes)");
  }
  auto first = bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos());
  img.pixels.assign(first, first + static_cast<std::ptrdiff_t>(need));
  return img;
}

ImageFile read_pnm(const std::filesystem::path& path) {
  try {
    return decode_pnm(read_all(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_pnm(const ImageFile& img) {
  if (img.channels != 1 && img.channels != 3) throw ShapeError("pnm: channels must be 1 or 3");
  if (img.pixels.size() != img.width * img.height * img.channels) {
    throw ShapeError("pnm: pixel buffer does not match dimensions");
  }
  const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width) + " " + std::to_string(img.height) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

void write_pnm(const ImageFile& img, const std::filesystem::path& path) {
  const auto bytes = encode_pnm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

std::uint8_t quantize(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

Tensor image_to_tensor(const ImageFile& img) {
  Tensor t(Shape{1, img.channels, img.height, img.width});
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < img.channels; ++c)
        t.at(0, c, y, x) = img.pixels[(y * img.width + x) * img.channels + c] / 255.0;
  return t;
}

ImageFile tensor_to_image(const Tensor& t) {
  const Shape s = t.shape();
  if (s.n != 1 || (s.c != 1 && s.c != 3)) {
    throw ShapeError("save_image: expected (1, 1|3, h, w), got " + to_string(s));
  }
  ImageFile img{s.w, s.h, s.c, std::vector<std::uint8_t>(s.numel())};
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x)
      for (std::size_t c = 0; c < s.c; ++c)
        img.pixels[(y * s.w + x) * s.c + c] = quantize(t.at(0, c, y, x));
  return img;
}

Tensor load_image(const std::filesystem::path& path) { return image_to_tensor(read_pnm(path)); }

void save_image(const Tensor& t, const std::filesystem::path& path) {
  write_pnm(tensor_to_image(t), path);
}

Corpus::Corpus(std::vector<Tensor> images) : images_(std::move(images)) {
  for (const auto& im : images_) {
    if (im.shape().n != 1) throw ShapeError("corpus images must have batch 1");
    if (im.shape().c != images_.front().shape().c) {
      throw DataError("corpus mixes channel counts");
    }
  }
}

Corpus Corpus::from_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::ranges::transform(ext, ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
  }
  std::ranges::sort(files);
  if (files.empty()) throw DataError("corpus directory has no .ppm/.pgm images: " + dir.string());
  std::vector<Tensor> images;
  images.reserve(files.size());
  for (const auto& f : files) images.push_back(load_image(f));
  return Corpus(std::move(images));
}

std::size_t Corpus::channels() const { return empty() ? 0 : images_.front().shape().c; }

std::size_t Corpus::min_side() const {
  std::size_t m = 0;
  for (const auto& im : images_) {
    const std::size_t side = std::min(im.shape().h, im.shape().w);
    m = (m == 0) ? side : std::min(m, side);
  }
  return m;
}

Tensor sample_batch(const Corpus& corpus, const SampleConfig& cfg, Rng& rng) {
  if (corpus.empty()) throw DataError("sample_batch: empty corpus");
  if (cfg.batch == 0 || cfg.crop_size == 0) throw ShapeError("sample_batch: zero batch or crop");
  if (cfg.crop_size > corpus.min_side()) {
    throw DataError("sample_batch: crop " + std::to_string(cfg.crop_size) +
                    " exceeds smallest corpus image side " + std::to_string(corpus.min_side()));
  }
  std::vector<Tensor> items;
  items.reserve(cfg.batch);
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    const Tensor& src = corpus.images()[rng.below(corpus.size())];
    const std::size_t y0 = rng.below(src.shape().h - cfg.crop_size + 1);
    const std::size_t x0 = rng.below(src.shape().w - cfg.crop_size + 1);
    Tensor patch = crop(src, y0, x0, cfg.crop_size, cfg.crop_size);
    if (cfg.flip_h && rng.coin()) patch = flip_horizontal(patch);
    if (cfg.flip_v && rng.coin()) patch = flip_vertical(patch);
    items.push_back(std::move(patch));
  }
  return stack_batch(items);
}

Tensor synthetic_image(Rng& rng, std::size_t size, std::size_t channels) {
  using std::numbers::pi;
  Tensor img(Shape{1, channels, size, size});
  const double s = static_cast<double>(size);

  std::vector<double> base(channels), gx(channels), gy(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    base[c] = rng.uniform(0.25, 0.75);
    gx[c] = rng.uniform(-0.25, 0.25);
    gy[c] = rng.uniform(-0.25, 0.25);
  }
  struct Grating {
    double fx, fy, phase;
    std::vector<double> amp;
  };
  std::vector<Grating> gratings(2);
  for (auto& g : gratings) {
    const double period = rng.uniform(8.0, 28.0);
    const double angle = rng.uniform(0.0, pi);
    g.fx = std::cos(angle) * 2.0 * pi / period;
    g.fy = std::sin(angle) * 2.0 * pi / period;
    g.phase = rng.uniform(0.0, 2.0 * pi);
    for (std::size_t c = 0; c < channels; ++c) g.amp.push_back(rng.uniform(0.03, 0.12));
  }
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x) {
        const double u = x / s - 0.5;
        const double v = y / s - 0.5;
        double val = base[c] + gx[c] * u + gy[c] * v;
        for (const auto& g : gratings) val += g.amp[c] * std::sin(g.fx * x + g.fy * y + g.phase);
        img.at(0, c, y, x) = val;
      }

  const std::size_t rects = 3;
  for (std::size_t r = 0; r < rects; ++r) {
    const std::size_t rw = size / 8 + rng.below(size / 3);
    const std::size_t rh = size / 8 + rng.below(size / 3);
    const std::size_t y0 = rng.below(size - rh + 1);
    const std::size_t x0 = rng.below(size - rw + 1);
    const double alpha = rng.uniform(0.4, 0.8);
    std::vector<double> colour(channels);
    for (auto& col : colour) col = rng.uniform(0.1, 0.9);
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t y = y0; y < y0 + rh; ++y)
        for (std::size_t x = x0; x < x0 + rw; ++x) {
          double& p = img.at(0, c, y, x);
          p = (1.0 - alpha) * p + alpha * colour[c];
        }
  }
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          std::size_t count, std::size_t size,
                                                          std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  Rng rng(seed);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%03zu.ppm", i);
    auto path = dir / name;
    save_image(synthetic_image(rng, size, 3), path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace lpae
