#include "lpae/analysis.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace lpae {

double psnr(const Tensor& a, const Tensor& b, double peak) {
  require_same_shape(a, b, "psnr");
  if (a.empty()) throw ShapeError("psnr: empty tensor");
  const double mse = sum_sq(sub(a, b)) / static_cast<double>(a.numel());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr std::size_t kWin = 11;

std::array<double, kWin> gaussian_window() {
  std::array<double, kWin> g{};
  double total = 0.0;
  for (std::size_t i = 0; i < kWin; ++i) {
    const double x = static_cast<double>(i) - 5.0;
    g[i] = std::exp(-(x * x) / (2.0 * 1.5 * 1.5));
    total += g[i];
  }
  for (auto& v : g) v /= total;
  return g;
}

// Valid-mode separable Gaussian filter of an h x w plane.
std::vector<double> filter_valid(std::span<const double> src, std::size_t h, std::size_t w) {
  static const auto g = gaussian_window();
  const std::size_t oh = h - kWin + 1;
  const std::size_t ow = w - kWin + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kWin; ++k) acc += g[k] * src[y * w + x + k];
      rows[y * ow + x] = acc;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kWin; ++k) acc += g[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

double ssim_plane(std::span<const double> a, std::span<const double> b, std::size_t h, std::size_t w) {
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = filter_valid(a, h, w);
  const auto mu_b = filter_valid(b, h, w);
  const auto e_aa = filter_valid(aa, h, w);
  const auto e_bb = filter_valid(bb, h, w);
  const auto e_ab = filter_valid(ab, h, w);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

void require_ssim_shapes(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "ssim");
  if (a.shape().h < kWin || a.shape().w < kWin || a.empty()) {
    throw ShapeError("ssim: spatial size must be at least 11x11, got " + to_string(a.shape()));
  }
}

}  // namespace

double ssim(const Tensor& a, const Tensor& b) {
  require_ssim_shapes(a, b);
  const Shape s = a.shape();
  double total = 0.0;
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c) total += ssim_plane(a.plane(n, c), b.plane(n, c), s.h, s.w);
  return total / static_cast<double>(s.n * s.c);
}

QualityReport quality(const Tensor& a, const Tensor& b) {
  QualityReport r;
  r.psnr_db = psnr(a, b);
  r.ssim = ssim(a, b);
  const Shape s = a.shape();
  for (std::size_t c = 0; c < s.c; ++c) {
    Tensor ac = slice_channels(a, c, 1);
    Tensor bc = slice_channels(b, c, 1);
    r.channel_psnr.push_back(psnr(ac, bc));
    r.channel_ssim.push_back(ssim(ac, bc));
  }
  return r;
}

std::string format_psnr(double db) {
  if (std::isinf(db)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", db);
  return buf;
}

NetSpec parse_netspec(std::string_view text) {
  NetSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;
    std::vector<std::uint64_t> nums;
    std::string tok;
    while (fields >> tok) {
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0) {
        throw DataError("netspec line " + std::to_string(lineno) + ": '" + tok +
                        "' is not a positive integer");
      }
      nums.push_back(v);
    }
    if (kind == "conv" && nums.size() == 4) {
      spec.layers.push_back(LayerSpec{LayerSpec::Kind::conv, nums[0], nums[1], nums[2], nums[3]});
    } else if (kind == "fc" && nums.size() == 2) {
      spec.layers.push_back(LayerSpec{LayerSpec::Kind::fc, nums[0], 0, nums[1], 0});
    } else {
      throw DataError("netspec line " + std::to_string(lineno) +
                      ": expected 'conv in k out out_hw' or 'fc in out'");
    }
  }
  return spec;
}

NetSpec load_netspec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open netspec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_netspec(ss.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::uint64_t complexity(const NetSpec& spec) {
  std::uint64_t total = 0;
  for (const auto& l : spec.layers) {
    if (l.kind == LayerSpec::Kind::conv) total += l.in * l.kernel * l.kernel * l.out * l.out_hw * l.out_hw;
    else total += l.in * l.out;
  }
  return total;
}

std::vector<std::size_t> channel_chain_breaks(const NetSpec& spec) {
  std::vector<std::size_t> breaks;
  const LayerSpec* prev = nullptr;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    if (l.kind != LayerSpec::Kind::conv) continue;
    if (prev && prev->out != l.in) breaks.push_back(i + 1);
    prev = &l;
  }
  return breaks;
}

double acceleration_rate(double basic_cost, double connected_cost) {
  if (!(connected_cost > 0.0)) throw ShapeError("acceleration_rate: connected cost must be positive");
  return basic_cost / connected_cost;
}

double acceleration_rate(const NetSpec& basic, const NetSpec& connected) {
  return acceleration_rate(static_cast<double>(complexity(basic)),
                           static_cast<double>(complexity(connected)));
}

BranchFractions branch_fractions(const BranchModel& m) {
  auto sq = [](double v) { return v * v; };
  return BranchFractions{sq(m.approx_spatial) * sq(m.approx_channels),
                         sq(m.detail_spatial) * sq(m.detail_channels)};
}

BranchModel wavelet_branch_model() { return BranchModel{0.5, 1.0, 0.5, 0.25}; }

}  // namespace lpae
