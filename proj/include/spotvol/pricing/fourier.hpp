#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "spotvol/errors.hpp"
#include "spotvol/math/gauss_legendre.hpp"
#include "spotvol/pricing/black_scholes.hpp"
#include "spotvol/pricing/contract.hpp"

namespace spotvol::pricing {

using Complex = std::complex<double>;

// Characteristic function of the log return X = log(S_T/S_t) under the
// risk-neutral measure, drift (r - q) included: a -> E[e^{i a X}].
using CharFn = std::function<Complex(Complex)>;
// Same map evaluated for a batch of frequencies in one call; lets ODE-driven
// characteristic functions share their setup across quadrature nodes.
using BatchCharFn = std::function<std::vector<Complex>(std::span<const Complex>)>;

inline BatchCharFn batch_from_single(CharFn chf) {
  return [chf = std::move(chf)](std::span<const Complex> as) {
    std::vector<Complex> out(as.size());
    for (std::size_t i = 0; i < as.size(); ++i) out[i] = chf(as[i]);
    return out;
  };
}

// Quadrature grid for the two inversion integrals
//   Pi1 = 1/2 + (1/pi) int_0^inf Re[e^{-iw log k} phi(w - i) / (i w phi(-i))] dw,
//   Pi2 = 1/2 + (1/pi) int_0^inf Re[e^{-iw log k} phi(w) / (i w)] dw,
//   C   = e^{-q tau} S Pi1 - e^{-r tau} K Pi2.
// Once built for a model/maturity the grid prices any strike whose |log k|
// does not exceed the oscillation budget it was built with.
class FourierGrid {
public:
  double call_price(double spot, double strike, double rate, double div,
                    double tau) const {
    const double logk = std::log(strike / spot);
    double pi1 = 0.0, pi2 = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const double w = nodes_[j];
      const Complex rot = std::exp(Complex(0.0, -w * logk));
      // Re(z / (i w)) = Im(z) / w
      pi1 += weights_[j] * (rot * phi1_[j]).imag() / w;
      pi2 += weights_[j] * (rot * phi2_[j]).imag() / w;
    }
    pi1 = 0.5 + pi1 / std::numbers::pi;
    pi2 = 0.5 + pi2 / std::numbers::pi;
    return std::exp(-div * tau) * spot * pi1 - std::exp(-rate * tau) * strike * pi2;
  }

  double upper() const { return upper_; }
  std::size_t size() const { return nodes_.size(); }

  static FourierGrid build(const BatchCharFn& chf, double tau, double max_abs_logk,
                           double tail_tol = 1e-10) {
    FourierGrid grid;
    // Decay probe: find where |phi| is negligible.
    auto mag_at = [&](double w) {
      std::vector<Complex> a{Complex(w, 0.0)};
      return std::abs(chf(a)[0]);
    };
    double upper = 8.0, last_mag = mag_at(upper);
    double prev_w = 0.0, prev_mag = 1.0;
    while (last_mag >= 1e-12 && upper < 2.2e5) {
      prev_w = upper;
      prev_mag = last_mag;
      upper *= 2.0;
      last_mag = mag_at(upper);
    }
    if (!(last_mag < 1e-12)) {
      std::ostringstream msg;
      msg << "fourier: characteristic function has not decayed below 1e-12 by w = "
          << upper << " (|phi| = " << last_mag << ", tau = " << tau << ")";
      throw NumericError(msg.str());
    }

    grid.upper_ = upper;
    // Panel width: at most ~8 oscillation periods per 32-point panel (the
    // integrand rotates at |log k| plus the chf phase drift), and at least 8
    // panels across the decay range.
    const double osc = max_abs_logk + std::max(0.05, 0.2 * tau);
    const double width = std::min(std::max(0.5, 8.0 * 2.0 * std::numbers::pi / osc),
                                  upper / 8.0);
    const std::size_t panels =
        static_cast<std::size_t>(std::ceil(upper / width));
    const math::QuadRule base = math::gauss_legendre(32);
    grid.nodes_.reserve(panels * 32);
    grid.weights_.reserve(panels * 32);
    double lo = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
      const double hi = (p + 1 == panels) ? upper : lo + upper / panels;
      const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
      for (std::size_t j = 0; j < 32; ++j) {
        grid.nodes_.push_back(c + h * base.nodes[j]);
        grid.weights_.push_back(h * base.weights[j]);
      }
      lo = hi;
    }

    std::vector<Complex> a2(grid.nodes_.size()), a1(grid.nodes_.size() + 1);
    for (std::size_t j = 0; j < grid.nodes_.size(); ++j) {
      a2[j] = Complex(grid.nodes_[j], 0.0);
      a1[j] = Complex(grid.nodes_[j], -1.0);
    }
    a1.back() = Complex(0.0, -1.0);  // phi(-i) for the share-measure normaliser
    grid.phi2_ = chf(a2);
    std::vector<Complex> shifted = chf(a1);
    const Complex norm = shifted.back();
    grid.phi1_.assign(shifted.begin(), shifted.end() - 1);
    for (auto& v : grid.phi1_) v /= norm;

    // Tail bound from the fitted exponential decay of |phi|.
    const double decay = (prev_w > 0.0 && prev_mag > last_mag)
                             ? std::log(prev_mag / last_mag) / (upper - prev_w)
                             : 1.0;
    const double tail = last_mag / (std::max(decay, 1e-6) * upper * std::numbers::pi);
    if (tail > tail_tol) {
      std::ostringstream msg;
      msg << "fourier: truncation tail estimate " << tail << " exceeds tolerance "
          << tail_tol << " at U = " << upper;
      throw NumericError(msg.str());
    }
    return grid;
  }

private:
  double upper_ = 0.0;
  std::vector<double> nodes_, weights_;
  std::vector<Complex> phi1_, phi2_;
};

// European price by Fourier inversion of the supplied characteristic
// function; puts are recovered through put-call parity.
inline PriceQuote fourier_price(const BatchCharFn& chf, const ContractSpec& c) {
  c.validate();
  const double logk = std::abs(std::log(c.strike / c.spot));
  const FourierGrid grid = FourierGrid::build(chf, c.maturity, logk);
  double price =
      grid.call_price(c.spot, c.strike, c.rate, c.div_yield, c.maturity);
  if (!c.is_call)
    price += c.strike * std::exp(-c.rate * c.maturity) -
             c.spot * std::exp(-c.div_yield * c.maturity);

  PriceQuote quote;
  quote.price = price;
  const double margin = 1e-9 * c.spot;
  if (price > c.lower_bound() + margin && price < c.upper_bound() - margin) {
    quote.implied_vol = implied_vol(c, price);
    quote.vega = bs_vega(c, quote.implied_vol);
  } else {
    quote.implied_vol = std::numeric_limits<double>::quiet_NaN();
    quote.vega = std::numeric_limits<double>::quiet_NaN();
  }
  return quote;
}

inline PriceQuote fourier_price(const CharFn& chf, const ContractSpec& c) {
  return fourier_price(batch_from_single(chf), c);
}

}  // namespace spotvol::pricing
