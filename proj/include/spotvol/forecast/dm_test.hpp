#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "spotvol/errors.hpp"
#include "spotvol/math/normal.hpp"

namespace spotvol::forecast {

struct DmResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

// Diebold-Mariano test on two loss series. The statistic is the mean loss
// differential d = L_a - L_b over its HAC-consistent (Bartlett) standard
// error, asymptotically N(0,1); a negative value says model a outperforms
// model b. One-sided p is P(Z < statistic), i.e. small when a is
// significantly better.
inline DmResult dm_test(std::span<const double> loss_a, std::span<const double> loss_b,
                        bool one_sided = true, int hac_lags = 0) {
  if (loss_a.size() != loss_b.size())
    throw DomainError("dm_test: loss series length mismatch");
  const std::size_t n = loss_a.size();
  if (n < 10) throw DomainError("dm_test: need at least 10 observations");

  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(loss_a[i]) || !std::isfinite(loss_b[i]))
      throw DomainError("dm_test: losses must be finite");
    d[i] = loss_a[i] - loss_b[i];
    mean += d[i];
  }
  mean /= static_cast<double>(n);

  double gamma0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) gamma0 += (d[i] - mean) * (d[i] - mean);
  gamma0 /= static_cast<double>(n);
  double s = gamma0;
  for (int lag = 1; lag <= hac_lags; ++lag) {
    const double w = 1.0 - static_cast<double>(lag) / (hac_lags + 1.0);
    double g = 0.0;
    for (std::size_t i = static_cast<std::size_t>(lag); i < n; ++i)
      g += (d[i] - mean) * (d[i - static_cast<std::size_t>(lag)] - mean);
    s += 2.0 * w * g / static_cast<double>(n);
  }
  if (!(s > 0.0))
    throw NumericError("dm_test: degenerate test, zero variance of the loss differential");

  DmResult result;
  result.statistic = mean / std::sqrt(s / static_cast<double>(n));
  result.p_value = one_sided
                       ? math::norm_cdf(result.statistic)
                       : 2.0 * math::norm_cdf(-std::abs(result.statistic));
  return result;
}

inline const char* significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

}  // namespace spotvol::forecast
