#pragma once

#include <cmath>
#include <sstream>

#include "spotvol/errors.hpp"
#include "spotvol/math/normal.hpp"
#include "spotvol/pricing/contract.hpp"

namespace spotvol::pricing {

inline double bs_price(const ContractSpec& c, double sigma) {
  c.validate();
  if (!(sigma >= 0.0)) throw DomainError("bs_price: sigma must be >= 0");
  const double fwd = c.forward();
  const double df = c.discount();
  if (sigma == 0.0) {
    const double intrinsic = df * (fwd - c.strike);
    return std::max(0.0, c.is_call ? intrinsic : -intrinsic);
  }
  const double total = sigma * std::sqrt(c.maturity);
  const double d1 = std::log(fwd / c.strike) / total + 0.5 * total;
  const double d2 = d1 - total;
  if (c.is_call)
    return df * (fwd * math::norm_cdf(d1) - c.strike * math::norm_cdf(d2));
  return df * (c.strike * math::norm_cdf(-d2) - fwd * math::norm_cdf(-d1));
}

// dPrice/dSigma; identical for calls and puts.
inline double bs_vega(const ContractSpec& c, double sigma) {
  c.validate();
  if (!(sigma > 0.0)) throw DomainError("bs_vega: sigma must be > 0");
  const double fwd = c.forward();
  const double total = sigma * std::sqrt(c.maturity);
  const double d1 = std::log(fwd / c.strike) / total + 0.5 * total;
  return c.discount() * fwd * math::norm_pdf(d1) * std::sqrt(c.maturity);
}

// Implied volatility by safeguarded Newton (bisection bracket, Newton step
// when it stays inside). Terminates at |bs(iv) - price| <= 1e-12 * spot.
inline double implied_vol(const ContractSpec& c, double price) {
  c.validate();
  const double lo_bound = c.lower_bound();
  const double hi_bound = c.upper_bound();
  if (!(price > lo_bound)) {
    std::ostringstream msg;
    msg << "implied_vol: price " << price << " at/below the model-free lower bound "
        << lo_bound;
    throw DomainError(msg.str());
  }
  if (!(price < hi_bound)) {
    std::ostringstream msg;
    msg << "implied_vol: price " << price << " at/above the model-free upper bound "
        << hi_bound;
    throw DomainError(msg.str());
  }

  const double tol = 1e-12 * c.spot;
  double lo = 1e-9, hi = 2.0;
  while (bs_price(c, hi) < price) {
    hi *= 2.0;
    if (hi > 64.0) throw NumericError("implied_vol: failed to bracket");
  }

  double sigma = std::min(std::max(0.25, lo), hi);
  for (int iter = 0; iter < 100; ++iter) {
    const double value = bs_price(c, sigma) - price;
    if (std::abs(value) <= tol) return sigma;
    if (value > 0.0) hi = sigma; else lo = sigma;
    const double vega = bs_vega(c, sigma);
    double next = sigma - value / vega;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    sigma = next;
  }
  if (std::abs(bs_price(c, sigma) - price) <= 1e-8 * c.spot) return sigma;
  throw NumericError("implied_vol: no convergence");
}

}  // namespace spotvol::pricing
