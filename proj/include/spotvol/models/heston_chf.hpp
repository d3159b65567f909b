#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>

#include "spotvol/errors.hpp"
#include "spotvol/models/params.hpp"

namespace spotvol::models {

using Complex = std::complex<double>;

namespace detail {

// log(1+z) without cancellation for small |z|.
inline Complex clog1p(Complex z) {
  if (std::abs(z) < 1e-4)
    return z * (1.0 - z * (0.5 - z * (1.0 / 3.0 - z * 0.25)));
  return std::log(1.0 + z);
}

// Riccati solution for the square-root diffusion, "little trap" form:
//   D' = P + Q D + R D^2, D(0) = 0, with
//   P = (u^2 - u)/2, Q = rho nu u - lambda, R = nu^2/2, u = i a.
// The stable root is evaluated as 2P/(beta + d), which stays accurate in the
// deterministic-variance limit nu -> 0.
struct HestonRiccati {
  Complex d;        // sqrt(Q^2 - 4 P R)
  Complex r_minus;  // stable root, (beta - d)/nu^2 = 2P/(beta + d)
  Complex g;        // r_minus / r_plus

  HestonRiccati(const HestonParams& p, Complex u) {
    const Complex beta = p.lambda - p.rho * p.nu * u;  // -Q
    const Complex psq = 0.5 * (u * u - u);
    d = std::sqrt(beta * beta - 2.0 * p.nu * p.nu * psq);
    r_minus = 2.0 * psq / (beta + d);
    g = r_minus * (p.nu * p.nu) / (beta + d);
  }

  Complex D(double tau) const {
    const Complex e = std::exp(-d * tau);
    return r_minus * (1.0 - e) / (1.0 - g * e);
  }

  // integral of D over [0,tau] times lambda*theta:
  // C = lambda theta [r_minus tau - (2/nu^2) log((1-g e^{-d tau})/(1-g))],
  // with the log of the ratio expanded through log1p so the g -> 0 limit
  // keeps full relative precision.
  Complex C(const HestonParams& p, double tau) const {
    const Complex e = std::exp(-d * tau);
    const Complex log_ratio = clog1p(g * (1.0 - e) / (1.0 - g));
    return p.lambda * p.theta *
           (r_minus * tau - 2.0 / (p.nu * p.nu) * log_ratio);
  }
};

// integral_0^tau ds / (1 - mu_v D(s)), needed for the variance-jump
// transform. Closed form from the partial fraction of (1-gE)/(A-BE).
inline Complex exp_jump_integral(const HestonRiccati& ric, double mu_v, double tau) {
  const Complex A = 1.0 - mu_v * ric.r_minus;
  const Complex B = ric.g - mu_v * ric.r_minus;
  const Complex d = ric.d;
  if (std::abs(B) < 1e-14 * (1.0 + std::abs(ric.g) + std::abs(mu_v * ric.r_minus))) {
    // B ~ 0: integrand reduces to (1 - g e^{-ds})/A
    return (tau + ric.g / d * (std::exp(-d * tau) - 1.0)) / A;
  }
  const Complex log_term =
      std::log((A - B * std::exp(-d * tau)) / (A - B)) + d * tau;
  return ric.g / B * tau + (B - ric.g * A) / (A * B * d) * log_term;
}

}  // namespace detail

// Characteristic function of X = log(S_tau / S_0) under the affine
// jump-diffusion (Heston diffusion, optional price/variance jumps) with
// risk-neutral drift r - q - eta*(E[e^{J_S}] - 1).
inline Complex heston_chf(const HestonParams& params,
                          const std::optional<JumpParams>& jumps, Complex a,
                          double tau, double rate, double div) {
  params.validate();
  if (jumps) jumps->validate();
  if (!(tau > 0.0)) throw DomainError("heston_chf: tau must be > 0");

  const Complex u = Complex(0.0, 1.0) * a;  // exponent variable, E[e^{u X}]
  Complex exponent = u * (rate - div) * tau;

  const Complex psq = 0.5 * (u * u - u);
  if (psq != 0.0) {
    detail::HestonRiccati ric(params, u);
    exponent += ric.C(params, tau) + ric.D(tau) * params.v0;
    if (jumps && jumps->eta > 0.0) {
      const Complex chf_s =
          std::exp(u * jumps->mu_s + 0.5 * u * u * jumps->sigma_s * jumps->sigma_s);
      Complex iv = (jumps->mu_v > 0.0)
                       ? detail::exp_jump_integral(ric, jumps->mu_v, tau)
                       : Complex(tau, 0.0);
      exponent += jumps->eta * (chf_s * iv - tau) -
                  u * jumps->eta * jumps->price_compensator() * tau;
    }
  } else if (jumps && jumps->eta > 0.0) {
    // u = 0 or u = 1: the Riccati forcing vanishes, D == 0, and for u = 1 the
    // jump transform cancels the compensator exactly (martingale identity).
    const Complex chf_s =
        std::exp(u * jumps->mu_s + 0.5 * u * u * jumps->sigma_s * jumps->sigma_s);
    exponent += jumps->eta * tau * (chf_s - 1.0) -
                u * jumps->eta * jumps->price_compensator() * tau;
  }

  if (exponent.real() > 700.0) {
    std::ostringstream msg;
    msg << "heston_chf: exponent overflow at a = (" << a.real() << ", "
        << a.imag() << "), tau = " << tau;
    throw NumericError(msg.str());
  }
  return std::exp(exponent);
}

}  // namespace spotvol::models
