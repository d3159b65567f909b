#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotvol/errors.hpp"
#include "spotvol/forecast/dm_test.hpp"
#include "spotvol/forecast/metrics.hpp"

namespace spotvol::forecast {

struct HorizonMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double mse = 0.0;
  double qlike = 0.0;
  double mda = 0.0;
  std::size_t n_obs = 0;
};

struct BoxplotSummary {
  double median = 0.0, q1 = 0.0, q3 = 0.0;
};

// Aligned forecast/actual series for one model and horizon. prev_actual is
// the day-before actual used by the directional-accuracy indicator.
struct ForecastSeries {
  std::vector<double> actual;
  std::vector<double> predicted;
  std::vector<double> prev_actual;
};

struct EvalReport {
  std::vector<std::string> models;
  std::vector<int> horizons;
  // metrics[model][horizon]; a model lacking a horizon is reported missing
  std::map<std::string, std::map<int, HorizonMetrics>> metrics;
  std::vector<std::pair<std::string, int>> missing;
  // pairwise DM on day-h=1 absolute errors, row outperforms column when < 0
  std::vector<std::vector<double>> dm_stat;
  std::vector<std::vector<std::string>> dm_stars;
  std::map<std::string, BoxplotSummary> abs_error_box;
  std::map<std::string, BoxplotSummary> qlike_box;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["models"] = models;
    j["horizons"] = horizons;
    for (const auto& [model, by_h] : metrics)
      for (const auto& [h, m] : by_h)
        j["metrics"][model][std::to_string(h)] = {
            {"mae", m.mae},   {"rmse", m.rmse},   {"mse", m.mse},
            {"qlike", m.qlike}, {"mda", m.mda},   {"n_obs", m.n_obs}};
    for (const auto& [model, h] : missing)
      j["missing"].push_back({{"model", model}, {"horizon", h}});
    j["dm_stat"] = dm_stat;
    j["dm_stars"] = dm_stars;
    for (const auto& [model, b] : abs_error_box)
      j["abs_error_box"][model] = {{"median", b.median}, {"q1", b.q1}, {"q3", b.q3}};
    for (const auto& [model, b] : qlike_box)
      j["qlike_box"][model] = {{"median", b.median}, {"q1", b.q1}, {"q3", b.q3}};
    return j;
  }
};

namespace detail {

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace detail

// Assembles loss metrics per model and horizon, the pairwise one-sided DM
// matrix on one-day absolute errors, and boxplot summaries of the per-day
// error distributions.
inline EvalReport evaluate(
    const std::map<std::string, std::map<int, ForecastSeries>>& forecasts,
    const std::vector<int>& horizons) {
  EvalReport report;
  report.horizons = horizons;
  for (const auto& [model, _] : forecasts) report.models.push_back(model);

  for (const auto& [model, by_h] : forecasts) {
    for (int h : horizons) {
      const auto it = by_h.find(h);
      if (it == by_h.end()) {
        report.missing.emplace_back(model, h);
        continue;
      }
      const ForecastSeries& s = it->second;
      HorizonMetrics m;
      m.mae = mae(s.actual, s.predicted);
      m.mse = mse(s.actual, s.predicted);
      m.rmse = std::sqrt(m.mse);
      m.qlike = qlike(s.actual, s.predicted);
      m.mda = mda(s.actual, s.predicted, s.prev_actual);
      m.n_obs = s.actual.size();
      report.metrics[model][h] = m;
    }
  }

  // one-day distributions and DM matrix
  std::map<std::string, std::vector<double>> abs_errors;
  for (const auto& [model, by_h] : forecasts) {
    const auto it = by_h.find(1);
    if (it == by_h.end()) continue;
    const ForecastSeries& s = it->second;
    std::vector<double> abs_e(s.actual.size()), ql(s.actual.size());
    for (std::size_t i = 0; i < s.actual.size(); ++i) {
      abs_e[i] = std::abs(s.predicted[i] - s.actual[i]);
      const double gap = s.actual[i] - s.predicted[i];
      ql[i] = std::exp(gap) - gap - 1.0;
    }
    report.abs_error_box[model] =
        BoxplotSummary{detail::quantile(abs_e, 0.5), detail::quantile(abs_e, 0.25),
                       detail::quantile(abs_e, 0.75)};
    report.qlike_box[model] =
        BoxplotSummary{detail::quantile(ql, 0.5), detail::quantile(ql, 0.25),
                       detail::quantile(ql, 0.75)};
    abs_errors[model] = std::move(abs_e);
  }

  const std::size_t n_models = report.models.size();
  if (n_models >= 2) {
    report.dm_stat.assign(n_models, std::vector<double>(n_models, 0.0));
    report.dm_stars.assign(n_models, std::vector<std::string>(n_models, ""));
    for (std::size_t i = 0; i < n_models; ++i)
      for (std::size_t j = 0; j < n_models; ++j) {
        if (i == j) continue;
        const auto a = abs_errors.find(report.models[i]);
        const auto b = abs_errors.find(report.models[j]);
        if (a == abs_errors.end() || b == abs_errors.end()) continue;
        const DmResult dm = dm_test(a->second, b->second, true, 0);
        report.dm_stat[i][j] = dm.statistic;
        report.dm_stars[i][j] = significance_stars(dm.p_value);
      }
  }
  return report;
}

}  // namespace spotvol::forecast
