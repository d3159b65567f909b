#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <vector>

#include "spotvol/errors.hpp"
#include "spotvol/models/params.hpp"

namespace spotvol::models {

using Complex = std::complex<double>;

// Characteristic function of X = log(S_tau/S_0) under the rough Heston model
// with zero rates: E[e^{i a X}] = exp(g1 + v0 g2), where h solves the
// fractional Riccati equation
//   D^alpha h = F(u, h),  I^{1-alpha} h(0) = 0,  u = i a,
//   F(u, h) = (u^2 - u)/2 + (rho nu u - lambda) h + nu^2 h^2 / 2,
// g1 = theta lambda int_0^tau h ds and g2 = I^{1-alpha} h(tau), which equals
// int_0^tau F(u, h) ds by the semigroup property of fractional integrals.
//
// The Volterra form h = I^alpha F(u,h) is integrated with the fractional
// Adams predictor-corrector on a uniform grid; the corrector is iterated to
// a fixed point, so at alpha = 1 the scheme reduces to the implicit
// trapezoidal rule and degenerates exactly to the classical Heston Riccati.
inline Complex fractional_chf(const RoughHestonParams& params, Complex a,
                              double tau, int grid_steps = 0) {
  params.validate();
  if (!(tau > 0.0)) throw DomainError("fractional_chf: tau must be > 0");
  if (grid_steps == 0)
    grid_steps = std::max(64, static_cast<int>(std::ceil(512.0 * tau)));
  if (grid_steps < 16) throw DomainError("fractional_chf: grid_steps must be >= 16");

  const double alpha = params.alpha;
  const HestonParams& p = params.base;
  const Complex u = Complex(0.0, 1.0) * a;
  const Complex forcing = 0.5 * (u * u - u);
  const Complex lin = p.rho * p.nu * u - p.lambda;
  const double quad = 0.5 * p.nu * p.nu;
  auto F = [&](Complex h) { return forcing + lin * h + quad * h * h; };

  const std::size_t m = static_cast<std::size_t>(grid_steps);
  const double dt = tau / static_cast<double>(grid_steps);
  const double dt_alpha = std::pow(dt, alpha);
  const double pred_scale = dt_alpha / std::tgamma(alpha + 1.0);
  const double corr_scale = dt_alpha / std::tgamma(alpha + 2.0);

  // b[k] = (k+1)^alpha - k^alpha (predictor), A[k] = second difference of
  // k^{alpha+1} (corrector interior weights).
  std::vector<double> pow_a(m + 2), pow_a1(m + 2);
  for (std::size_t k = 0; k < m + 2; ++k) {
    pow_a[k] = std::pow(static_cast<double>(k), alpha);
    pow_a1[k] = std::pow(static_cast<double>(k), alpha + 1.0);
  }
  std::vector<double> b(m), A(m);
  for (std::size_t k = 0; k < m; ++k) {
    b[k] = pow_a[k + 1] - pow_a[k];
    A[k] = pow_a1[k + 2] + pow_a1[k] - 2.0 * pow_a1[k + 1];
  }

  std::vector<Complex> h(m + 1), f(m + 1);
  h[0] = 0.0;
  f[0] = F(h[0]);

  for (std::size_t k = 0; k + 1 <= m; ++k) {
    Complex pred = 0.0;
    for (std::size_t j = 0; j <= k; ++j) pred += b[k - j] * f[j];
    pred *= pred_scale;

    const double kd = static_cast<double>(k);
    Complex history = (pow_a1[k] - (kd - alpha) * pow_a[k + 1]) * f[0];
    for (std::size_t j = 1; j <= k; ++j) history += A[k - j] * f[j];
    history *= corr_scale;

    Complex next = history + corr_scale * F(pred);
    bool ok = false;
    for (int it = 0; it < 20; ++it) {
      const Complex refined = history + corr_scale * F(next);
      const double change = std::abs(refined - next);
      next = refined;
      if (change < 1e-14 * (1.0 + std::abs(next))) {
        ok = true;
        break;
      }
    }
    if (!ok && !(std::abs(next) < 1e8)) {
      std::ostringstream msg;
      msg << "fractional_chf: corrector diverged at step " << k + 1 << "/"
          << grid_steps << " (dt = " << dt << ", a = (" << a.real() << ","
          << a.imag() << "))";
      throw NumericError(msg.str());
    }
    h[k + 1] = next;
    f[k + 1] = F(next);
  }

  // g1 and g2 by the trapezoidal rule over the solution grid
  Complex int_h = 0.0, int_f = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    int_h += 0.5 * dt * (h[k] + h[k + 1]);
    int_f += 0.5 * dt * (f[k] + f[k + 1]);
  }
  const Complex exponent = p.theta * p.lambda * int_h + p.v0 * int_f;
  if (!std::isfinite(exponent.real()) || !std::isfinite(exponent.imag()))
    throw NumericError("fractional_chf: non-finite exponent");
  return std::exp(exponent);
}

}  // namespace spotvol::models
