#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "spotvol/data/dates.hpp"
#include "spotvol/errors.hpp"

namespace spotvol::data {

// Daily log realized variance series computed from intraday mid prices,
// with the trailing horizon means the HAR regressions consume.
struct RVSeries {
  std::vector<Date> dates;           // strictly increasing
  std::vector<double> log_rv;        // log(annualisation * sum r^2)
  std::vector<double> anchor_var;    // annualised realized variance (pre-log)
  std::vector<double> rv1, rv5, rv22;  // trailing means of log_rv, NaN if short
  bool annualized = true;
  std::vector<std::string> warnings;

  std::size_t size() const { return dates.size(); }

  long index_of(Date d) const {
    for (std::size_t i = 0; i < dates.size(); ++i)
      if (dates[i] == d) return static_cast<long>(i);
    return -1;
  }
};

// RV_t = log( A * sum_s r_s^2 ) with r_s the successive log mid-price
// returns within day t and A = 252 when annualising. Days whose squared-
// return sum is zero cannot be log-transformed; they are dropped with a
// warning. Horizon means average the log series over exactly h prior days.
inline RVSeries compute_rv(const std::map<Date, std::vector<double>>& intraday,
                           bool annualize = true) {
  RVSeries series;
  series.annualized = annualize;
  const double scale = annualize ? 252.0 : 1.0;

  for (const auto& [date, prices] : intraday) {
    if (prices.size() < 2)
      throw DataError("compute_rv: day " + std::to_string(date) +
                      " has fewer than 2 prices");
    double sum_sq = 0.0;
    for (std::size_t i = 1; i < prices.size(); ++i) {
      if (!(prices[i] > 0.0) || !(prices[i - 1] > 0.0))
        throw DataError("compute_rv: nonpositive price on day " +
                        std::to_string(date) + " at index " + std::to_string(i));
      const double r = std::log(prices[i] / prices[i - 1]);
      sum_sq += r * r;
    }
    if (sum_sq <= 0.0) {
      series.warnings.push_back("day " + std::to_string(date) +
                                " dropped: zero realized variance (flat prices)");
      continue;
    }
    series.dates.push_back(date);
    series.anchor_var.push_back(scale * sum_sq);
    series.log_rv.push_back(std::log(scale * sum_sq));
  }

  const std::size_t n = series.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  series.rv1.assign(n, nan);
  series.rv5.assign(n, nan);
  series.rv22.assign(n, nan);
  for (std::size_t i = 0; i < n; ++i) {
    series.rv1[i] = series.log_rv[i];
    if (i + 1 >= 5) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 5; ++j) acc += series.log_rv[i - j];
      series.rv5[i] = acc / 5.0;
    }
    if (i + 1 >= 22) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 22; ++j) acc += series.log_rv[i - j];
      series.rv22[i] = acc / 22.0;
    }
  }
  return series;
}

}  // namespace spotvol::data
