#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lpae/tensor.hpp"

namespace lpae {

/// 10 log10(peak^2 / MSE). Identical inputs return +infinity.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

/// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5), with
/// K1 = 0.01, K2 = 0.03 and dynamic range 1; averaged over channels and batch.
/// Requires height and width >= 11.
double ssim(const Tensor& a, const Tensor& b);

struct QualityReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::vector<double> channel_psnr;
  std::vector<double> channel_ssim;
};

QualityReport quality(const Tensor& a, const Tensor& b);

/// PSNR rendered with two decimals, or "inf".
std::string format_psnr(double db);

// ---- cost model ----------------------------------------------------------

struct LayerSpec {
  enum class Kind { conv, fc };
  Kind kind = Kind::conv;
  std::uint64_t in = 0;      // input channels / features
  std::uint64_t kernel = 0;  // conv only
  std::uint64_t out = 0;     // output channels / features
  std::uint64_t out_hw = 0;  // conv output spatial side
};

struct NetSpec {
  std::vector<LayerSpec> layers;
};

/// Parses one layer per line: `conv in_ch k out_ch out_hw` or `fc in out`;
/// `#` starts a comment. Every number must be positive.
NetSpec parse_netspec(std::string_view text);
NetSpec load_netspec(const std::filesystem::path& path);

/// Sum of in * k^2 * out * out_hw^2 over conv layers plus in * out over fc layers.
std::uint64_t complexity(const NetSpec& spec);
/// Line numbers (1-based layer index) where a conv's input channels differ
/// from the previous conv's output, e.g. at residual projections.
std::vector<std::size_t> channel_chain_breaks(const NetSpec& spec);

double acceleration_rate(double basic_cost, double connected_cost);
double acceleration_rate(const NetSpec& basic, const NetSpec& connected);

/// Relative cost of the two branches a decomposing autoencoder feeds into a
/// backbone. Cost scales with (spatial ratio)^2 and with (channel ratio)^2
/// when both input and output channels of every layer shrink together.
struct BranchModel {
  double approx_spatial = 0.5;
  double approx_channels = 1.0;
  double detail_spatial = 1.0;  // LPAE keeps details at full resolution
  double detail_channels = 0.25;
};

struct BranchFractions {
  double approx = 0.0;
  double detail = 0.0;
  double total() const { return approx + detail; }
};

BranchFractions branch_fractions(const BranchModel& model = {});
/// The wavelet autoencoder variant: details at half resolution as well.
BranchModel wavelet_branch_model();

}  // namespace lpae
