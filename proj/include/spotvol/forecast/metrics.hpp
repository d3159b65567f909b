#pragma once

#include <cmath>
#include <span>

#include "spotvol/errors.hpp"

namespace spotvol::forecast {

inline void check_lengths(std::span<const double> a, std::span<const double> b,
                          const char* who) {
  if (a.size() != b.size() || a.empty())
    throw DomainError(std::string(who) + ": series length mismatch or empty");
}

inline double mse(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = predicted[i] - actual[i];
    acc += e * e;
  }
  return acc / static_cast<double>(actual.size());
}

inline double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i)
    acc += std::abs(predicted[i] - actual[i]);
  return acc / static_cast<double>(actual.size());
}

inline double rmse(std::span<const double> actual, std::span<const double> predicted) {
  return std::sqrt(mse(actual, predicted));
}

// QLIKE on log realized volatility series:
//   mean[ exp(RV)/exp(RVhat) - (RV - RVhat) - 1 ],
// nonnegative, zero iff the forecasts match exactly.
inline double qlike(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, "qlike");
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double gap = actual[i] - predicted[i];
    acc += std::exp(gap) - gap - 1.0;
  }
  return acc / static_cast<double>(actual.size());
}

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Mean directional accuracy: the fraction of days whose forecast change
// sign(RVhat_t - RV_{t-1}) agrees with the realized change sign. The
// previous-day actuals come as their own series so callers control the
// alignment.
inline double mda(std::span<const double> actual, std::span<const double> predicted,
                  std::span<const double> previous_actual) {
  check_lengths(actual, predicted, "mda");
  check_lengths(actual, previous_actual, "mda");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < actual.size(); ++i)
    if (sgn(predicted[i] - previous_actual[i]) == sgn(actual[i] - previous_actual[i]))
      ++hits;
  return static_cast<double>(hits) / static_cast<double>(actual.size());
}

}  // namespace spotvol::forecast
