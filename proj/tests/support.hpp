#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include <lpae/rng.hpp>
#include <lpae/tensor.hpp>

namespace lpae::test {

inline Tensor random_tensor(Rng& rng, Shape s, double lo = -1.0, double hi = 1.0) {
  Tensor t(s);
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

// Central difference of f at x[i] with step eps; x is restored afterwards.
inline double central_diff(const std::function<double()>& f, double& x, double eps = 1e-5) {
  const double saved = x;
  x = saved + eps;
  const double plus = f();
  x = saved - eps;
  const double minus = f();
  x = saved;
  return (plus - minus) / (2.0 * eps);
}

// One coordinate of a piecewise-smooth objective. When a ReLU input or an L1
// residual changes sign inside [x - eps, x + eps] the central difference
// straddles a kink; the one-sided slopes then disagree and the analytic
// gradient must equal the slope on one side instead.
struct FdPoint {
  double central_err = 0.0;
  double one_sided_err = 0.0;  // best of forward / backward
  bool kink = false;

  double err() const { return kink ? one_sided_err : central_err; }
};

inline FdPoint fd_point(const std::function<double()>& f, double& x, double analytic, double tol,
                        double eps = 1e-5) {
  const double saved = x;
  const double f0 = f();
  x = saved + eps;
  const double plus = f();
  x = saved - eps;
  const double minus = f();
  x = saved;
  const double fwd = (plus - f0) / eps;
  const double bwd = (f0 - minus) / eps;
  FdPoint p;
  p.central_err = rel_err(analytic, (plus - minus) / (2.0 * eps));
  p.one_sided_err = std::min(rel_err(analytic, fwd), rel_err(analytic, bwd));
  p.kink = p.central_err >= tol && rel_err(fwd, bwd) >= tol;
  return p;
}

// Largest relative error over every coordinate of `values` against `analytic`.
template <class Values, class Analytic>
double max_fd_error(const std::function<double()>& f, Values&& values, const Analytic& analytic,
                    double eps = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    worst = std::max(worst, rel_err(analytic[i], central_diff(f, values[i], eps)));
  }
  return worst;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lpae_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace lpae::test
