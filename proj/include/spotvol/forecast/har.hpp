#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spotvol/data/dates.hpp"
#include "spotvol/data/rv.hpp"
#include "spotvol/errors.hpp"

namespace spotvol::forecast {

// Regression rows for one HAR(X) specification and one horizon. Row t uses
// regressors known at the origin date and targets the cumulative log RV over
// the following `horizon` days, so every regressor is dated strictly before
// the target window.
struct HarDesign {
  std::string model_tag;                 // "HAR-RV", "HAR-RV-VIX", ...
  std::vector<std::string> columns;      // intercept first
  Eigen::MatrixXd x;                     // rows x columns
  Eigen::VectorXd y;
  std::vector<data::Date> origin_dates;  // regressor date per row
  int horizon = 1;
};

struct HarFit {
  std::string model_tag;
  std::vector<std::string> columns;
  Eigen::VectorXd coef;
  Eigen::VectorXd se;        // Newey-West
  Eigen::VectorXd t_stat;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  Eigen::VectorXd residuals;
  int nw_lags = 0;
  int horizon = 1;
};

// Bartlett-kernel plug-in lag count, ceil(4 (T/100)^{2/9}).
inline int newey_west_default_lags(std::size_t n_rows) {
  return static_cast<int>(
      std::ceil(4.0 * std::pow(static_cast<double>(n_rows) / 100.0, 2.0 / 9.0)));
}

// OLS through the normal equations (LDLT) with Newey-West standard errors.
// nw_lags = 0 reduces to heteroskedasticity-robust (White) errors.
inline HarFit fit_har(const HarDesign& design, int nw_lags = -1) {
  const Eigen::Index n = design.x.rows(), p = design.x.cols();
  if (n < p + 2) throw DomainError("fit_har: need at least p + 2 rows");
  if (nw_lags < 0) nw_lags = newey_west_default_lags(static_cast<std::size_t>(n));

  // rank check first so collinear columns fail loudly by name
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    const auto& perm = qr.colsPermutation().indices();
    const Eigen::Index bad = perm(p - 1);  // least-pivoted column
    throw DomainError("fit_har: design is rank deficient, column \"" +
                      design.columns[static_cast<std::size_t>(bad)] +
                      "\" is collinear");
  }

  const Eigen::MatrixXd xtx = design.x.transpose() * design.x;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  HarFit fit;
  fit.model_tag = design.model_tag;
  fit.columns = design.columns;
  fit.horizon = design.horizon;
  fit.nw_lags = nw_lags;
  fit.coef = ldlt.solve(design.x.transpose() * design.y);
  fit.residuals = design.y - design.x * fit.coef;

  // Newey-West sandwich: S = G0 + sum_l w_l (G_l + G_l'), w_l = 1 - l/(L+1)
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index t = 0; t < n; ++t)
    s += fit.residuals(t) * fit.residuals(t) * design.x.row(t).transpose() *
         design.x.row(t);
  for (int lag = 1; lag <= nw_lags; ++lag) {
    const double w = 1.0 - static_cast<double>(lag) / (nw_lags + 1.0);
    Eigen::MatrixXd gl = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index t = lag; t < n; ++t)
      gl += fit.residuals(t) * fit.residuals(t - lag) *
            design.x.row(t).transpose() * design.x.row(t - lag);
    s += w * (gl + gl.transpose());
  }
  const Eigen::MatrixXd cov = ldlt.solve(ldlt.solve(s).transpose());
  fit.se.resize(p);
  fit.t_stat.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.se(j) = std::sqrt(std::max(0.0, cov(j, j)));
    fit.t_stat(j) = fit.se(j) > 0.0 ? fit.coef(j) / fit.se(j) : 0.0;
  }

  const double mean_y = design.y.mean();
  const double sst = (design.y.array() - mean_y).square().sum();
  const double ssr = fit.residuals.squaredNorm();
  fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (static_cast<double>(n) - 1.0) /
                         (static_cast<double>(n) - static_cast<double>(p));
  return fit;
}

// Exogenous daily series keyed by date (VIX close or a log spot-vol
// estimator, already transformed by the caller).
using DailySeries = std::map<data::Date, double>;

// Assembles the design for one model tag and horizon from the RV series.
// Exogenous values enter lagged: the value dated at the row's origin.
// Horizons run 1..22; the target is sum_{j=1..h} logRV_{t+j}, i.e. the
// cumulative log RV over (t, t+h]. An optional origin whitelist keeps
// competing specifications on an identical sample.
inline HarDesign build_har_design(
    const data::RVSeries& rv, int horizon, const std::string& model_tag,
    const std::optional<DailySeries>& exogenous, const std::string& exo_column,
    const std::set<data::Date>* allowed_origins = nullptr) {
  if (horizon < 1 || horizon > 22)
    throw DomainError("build_har_design: horizon must be in 1..22");

  std::vector<std::array<double, 5>> rows;
  std::vector<double> targets;
  std::vector<data::Date> dates;
  const bool with_exo = exogenous.has_value();
  for (std::size_t i = 0; i + static_cast<std::size_t>(horizon) < rv.size(); ++i) {
    if (std::isnan(rv.rv22[i])) continue;
    if (allowed_origins && !allowed_origins->count(rv.dates[i])) continue;
    double exo_value = 0.0;
    if (with_exo) {
      const auto it = exogenous->find(rv.dates[i]);
      if (it == exogenous->end()) continue;
      exo_value = it->second;
    }
    double target = 0.0;
    for (int j = 1; j <= horizon; ++j)
      target += rv.log_rv[i + static_cast<std::size_t>(j)];
    rows.push_back({1.0, rv.rv1[i], rv.rv5[i], rv.rv22[i], exo_value});
    targets.push_back(target);
    dates.push_back(rv.dates[i]);
  }
  if (rows.empty()) throw DataError("build_har_design: no complete rows");

  HarDesign design;
  design.model_tag = model_tag;
  design.horizon = horizon;
  design.columns = {"intercept", "rv_d", "rv_w", "rv_m"};
  if (with_exo) design.columns.push_back(exo_column);
  const Eigen::Index p = static_cast<Eigen::Index>(design.columns.size());
  design.x.resize(static_cast<Eigen::Index>(rows.size()), p);
  design.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < p; ++c)
      design.x(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    design.y(static_cast<Eigen::Index>(r)) = targets[r];
  }
  design.origin_dates = std::move(dates);
  return design;
}

// Fitted value for one design row; the one-day model is the horizon-1 case.
inline double forecast_h(const HarFit& fit, const Eigen::RowVectorXd& row,
                         int horizon) {
  if (horizon < 1 || horizon > 22)
    throw DomainError("forecast_h: horizon must be in 1..22");
  if (fit.horizon != horizon)
    throw DomainError("forecast_h: fit was estimated for horizon " +
                      std::to_string(fit.horizon));
  if (row.size() != fit.coef.size())
    throw DomainError("forecast_h: row width mismatch");
  return row.dot(fit.coef);
}

}  // namespace spotvol::forecast
