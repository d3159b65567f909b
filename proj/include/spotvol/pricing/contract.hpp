#pragma once

#include <cmath>

#include "spotvol/errors.hpp"

namespace spotvol::pricing {

struct ContractSpec {
  double strike = 100.0;
  double maturity = 0.5;   // year fraction
  bool is_call = true;
  double spot = 100.0;
  double rate = 0.0;       // continuously compounded, 1/year
  double div_yield = 0.0;

  void validate() const {
    if (!(strike > 0.0)) throw DomainError("contract: strike must be > 0");
    if (!(maturity > 0.0)) throw DomainError("contract: maturity must be > 0");
    if (!(spot > 0.0)) throw DomainError("contract: spot must be > 0");
  }

  double forward() const {
    return spot * std::exp((rate - div_yield) * maturity);
  }
  double discount() const { return std::exp(-rate * maturity); }
  double moneyness() const { return strike / spot; }

  // Model-free bounds on the option value.
  double lower_bound() const {
    const double intrinsic = spot * std::exp(-div_yield * maturity) -
                             strike * std::exp(-rate * maturity);
    return std::max(0.0, is_call ? intrinsic : -intrinsic);
  }
  double upper_bound() const {
    return is_call ? spot * std::exp(-div_yield * maturity)
                   : strike * std::exp(-rate * maturity);
  }
};

struct PriceQuote {
  double price = 0.0;
  double implied_vol = 0.0;  // NaN when the price sits on a model-free bound
  double vega = 0.0;
};

}  // namespace spotvol::pricing
