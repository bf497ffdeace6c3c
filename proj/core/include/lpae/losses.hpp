#pragma once

#include <vector>

#include "lpae/pyramid.hpp"
#include "lpae/tensor.hpp"

namespace lpae {

struct LossValue {
  double value = 0.0;
  Tensor grad;  // d(value)/d(prediction argument)
};

/// Mean absolute error (1/|I|) ||I - I'||_1; subgradient sign(I' - I)/|I|, sign(0) = 0.
LossValue loss_reconstruction(const Tensor& target, const Tensor& recon);
/// Mean squared error (1/|I_c|) ||I_c - I_down||^2; gradient w.r.t. I_c.
LossValue loss_energy(const Tensor& approx, const Tensor& target_down);
/// Mean square (1/|I_d|) ||I_d||^2.
LossValue loss_sparsity(const Tensor& detail);

struct LpaeLossWeights {
  double alpha = 1.0;
  double beta = 0.8;
  double gamma = 1.0;
};

struct LpaeLossTerms {
  double reconstruction = 0.0;
  double energy = 0.0;
  double sparsity = 0.0;
  double total = 0.0;
};

double lpae_total(const LpaeLossTerms& terms, const LpaeLossWeights& w);

struct LpaeLoss {
  LpaeLossTerms terms;
  Tensor grad_approx;
  Tensor grad_detail;
  Tensor grad_recon;
};

/// alpha * l_r(I, I') + beta * l_e(I_c, bicubic_down2(I)) + gamma * l_s(I_d).
LpaeLoss loss_lpae_total(const Tensor& image, const Tensor& approx, const Tensor& detail,
                         const Tensor& recon, const LpaeLossWeights& w);

struct LpsrLossWeights {
  double gamma = 1.0;
  double delta = 10.0;
  std::vector<double> lambdas{0.8, 1.2};

  /// 0.8, 1.2, then +0.4 per further level.
  static std::vector<double> default_lambdas(std::size_t levels);
};

struct LpsrLoss {
  double reconstruction = 0.0;
  double pyramid = 0.0;
  double total = 0.0;
  PyramidDecomposition grad_preds;  // w.r.t. predicted coarsest and details
  Tensor grad_recon;
};

/// gamma * l_rec(I, I') + delta * ( l1(I_c, I'_c) + sum_i lambda_i * l1(I_d_i, I'_d_i) ),
/// every l1 being a mean absolute error over its own element count.
LpsrLoss loss_lpsr(const PyramidDecomposition& preds, const PyramidDecomposition& targets,
                   const Tensor& hr, const Tensor& recon, const LpsrLossWeights& w);

}  // namespace lpae
