#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lpae::test {

struct GradCheck {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t coords = 0;
  std::size_t kinks = 0;  // coordinates judged by a one-sided slope
};

// Every layer type: conv s1, conv s2, tconv, relu, plus a mixed chain.
std::vector<GradCheck> layer_grad_checks(std::uint64_t seed);
// l_r, l_e, l_s, the weighted LPAE total and the LPSR total, w.r.t. every argument.
std::vector<GradCheck> loss_grad_checks(std::uint64_t seed);
// LPAE l_total w.r.t. parameters on one 8x8 RGB image; `per_tensor` coordinates
// sampled from each parameter tensor (0 = all of them). Kinks are detected
// against `tol`, see fd_point.
GradCheck lpae_end_to_end_check(std::uint64_t seed, std::size_t per_tensor, double tol = 1e-3);
// LPSR total w.r.t. embed parameters on a 16x16 HR image, K = 1.
GradCheck lpsr_embed_check(std::uint64_t seed, std::size_t coords, double tol = 1e-3);

}  // namespace lpae::test
