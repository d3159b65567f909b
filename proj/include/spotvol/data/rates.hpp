#pragma once

#include <algorithm>
#include <vector>

#include "spotvol/errors.hpp"

namespace spotvol::data {

// Zero curve as (maturity in years, continuously compounded rate) knots.
struct RateCurve {
  std::vector<double> tenors;  // strictly increasing, years
  std::vector<double> rates;

  void validate() const {
    if (tenors.empty() || tenors.size() != rates.size())
      throw DataError("rate curve: empty or mismatched tenors/rates");
    for (std::size_t i = 1; i < tenors.size(); ++i)
      if (!(tenors[i] > tenors[i - 1]))
        throw DataError("rate curve: tenors must be strictly increasing");
  }
};

// Linear interpolation in maturity, flat extrapolation beyond the endpoints.
inline double interp_rate(const RateCurve& curve, double tau) {
  curve.validate();
  if (tau <= curve.tenors.front()) return curve.rates.front();
  if (tau >= curve.tenors.back()) return curve.rates.back();
  const auto it = std::upper_bound(curve.tenors.begin(), curve.tenors.end(), tau);
  const std::size_t hi = static_cast<std::size_t>(it - curve.tenors.begin());
  const std::size_t lo = hi - 1;
  const double w = (tau - curve.tenors[lo]) / (curve.tenors[hi] - curve.tenors[lo]);
  return curve.rates[lo] + w * (curve.rates[hi] - curve.rates[lo]);
}

}  // namespace spotvol::data
