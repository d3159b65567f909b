#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "spotvol/errors.hpp"
#include "spotvol/math/gauss_legendre.hpp"

namespace spotvol::models {

// Sum-of-exponentials kernel K^n(t) = sum_i c_i exp(-x_i t) approximating the
// fractional kernel t^{alpha-1}/Gamma(alpha).
struct LiftedKernel {
  std::vector<double> weights;  // c_i > 0
  std::vector<double> rates;    // x_i >= 0, strictly increasing

  std::size_t size() const { return weights.size(); }

  void validate() const {
    if (weights.empty() || weights.size() != rates.size())
      throw DomainError("lifted_kernel: weights/rates size mismatch");
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] > 0.0)) throw DomainError("lifted_kernel: weights must be > 0");
      if (!(rates[i] >= 0.0)) throw DomainError("lifted_kernel: rates must be >= 0");
      if (i > 0 && !(rates[i] > rates[i - 1]))
        throw DomainError("lifted_kernel: rates must be strictly increasing");
    }
  }

  double value(double t) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      sum += weights[i] * std::exp(-rates[i] * t);
    return sum;
  }
};

inline double fractional_kernel(double t, double alpha) {
  return std::pow(t, alpha - 1.0) / std::tgamma(alpha);
}

// Geometric-bin moment matching of the fractional kernel's Laplace measure
// mu(dx) = x^{-alpha} dx / (Gamma(alpha) Gamma(1-alpha)): on each bin
// [r^{i-1-n/2}, r^{i-n/2}] the weight is the bin mass and the rate its
// first-moment centroid, which lands on a geometric grid proportional to
// r^{i-1-n/2}.
inline LiftedKernel build_lifted_kernel(int n, double hurst, double spacing) {
  if (n < 1) throw DomainError("build_lifted_kernel: n must be >= 1");
  if (!(hurst > 0.0 && hurst < 0.5))
    throw DomainError("build_lifted_kernel: hurst must be in (0, 1/2)");
  if (!(spacing > 1.0)) throw DomainError("build_lifted_kernel: spacing must be > 1");

  const double alpha = hurst + 0.5;
  // Gamma(alpha)Gamma(1-alpha) = pi / sin(pi alpha)
  const double gg = std::numbers::pi / std::sin(std::numbers::pi * alpha);
  const double p1 = 1.0 - alpha;  // in (0, 1/2)
  const double p2 = 2.0 - alpha;

  LiftedKernel kernel;
  kernel.weights.resize(static_cast<std::size_t>(n));
  kernel.rates.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double lo = std::pow(spacing, i - 1 - 0.5 * n);
    const double hi = lo * spacing;
    const double m0 = (std::pow(hi, p1) - std::pow(lo, p1)) / p1;
    const double m1 = (std::pow(hi, p2) - std::pow(lo, p2)) / p2;
    kernel.weights[static_cast<std::size_t>(i - 1)] = m0 / gg;
    kernel.rates[static_cast<std::size_t>(i - 1)] = m1 / m0;
  }
  kernel.validate();
  return kernel;
}

// Relative L2([t_min,1]) distance between K^n and the fractional kernel,
// resolved on log-spaced panels to handle the t^{alpha-1} singularity.
inline double kernel_l2_distance(const LiftedKernel& kernel, double alpha,
                                 double t_min = 1e-9) {
  auto sq_diff = [&](double t) {
    double d = kernel.value(t) - fractional_kernel(t, alpha);
    return d * d;
  };
  auto sq_ref = [&](double t) {
    double k = fractional_kernel(t, alpha);
    return k * k;
  };
  double num = math::integrate_log_panels(sq_diff, t_min, 1.0, 80, 16);
  double den = math::integrate_log_panels(sq_ref, t_min, 1.0, 80, 16);
  return std::sqrt(num / den);
}

}  // namespace spotvol::models
