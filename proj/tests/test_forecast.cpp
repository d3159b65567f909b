#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spotvol/forecast/dm_test.hpp"
#include "spotvol/forecast/evaluate.hpp"
#include "spotvol/forecast/har.hpp"
#include "spotvol/forecast/metrics.hpp"
#include "spotvol/math/rng.hpp"

using namespace spotvol;
using namespace spotvol::forecast;
using Catch::Approx;

namespace {

HarDesign make_design(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      std::vector<std::string> cols) {
  HarDesign d;
  d.model_tag = "test";
  d.columns = std::move(cols);
  d.x = x;
  d.y = y;
  d.horizon = 1;
  return d;
}

// RVSeries with prescribed daily log values and proper trailing means.
data::RVSeries series_from_logs(const std::vector<double>& logs) {
  data::RVSeries rv;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < logs.size(); ++i) {
    rv.dates.push_back(20200101 + static_cast<int>(i));
    rv.log_rv.push_back(logs[i]);
    rv.anchor_var.push_back(std::exp(logs[i]));
  }
  rv.rv1.assign(logs.size(), nan);
  rv.rv5.assign(logs.size(), nan);
  rv.rv22.assign(logs.size(), nan);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    rv.rv1[i] = logs[i];
    if (i + 1 >= 5) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 5; ++j) acc += logs[i - j];
      rv.rv5[i] = acc / 5.0;
    }
    if (i + 1 >= 22) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 22; ++j) acc += logs[i - j];
      rv.rv22[i] = acc / 22.0;
    }
  }
  return rv;
}

}  // namespace

TEST_CASE("exact linear data recovers coefficients to 1e-10") {
  math::Rng rng(12);
  const int n = 60;
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.uniform();
    x(i, 2) = rng.uniform();
    x(i, 3) = rng.uniform();
    y(i) = 0.1 + 0.5 * x(i, 1);
  }
  const HarFit fit = fit_har(make_design(x, y, {"intercept", "x1", "x2", "x3"}), 3);
  REQUIRE(fit.coef(0) == Approx(0.1).margin(1e-10));
  REQUIRE(fit.coef(1) == Approx(0.5).margin(1e-10));
  REQUIRE(fit.coef(2) == Approx(0.0).margin(1e-10));
  REQUIRE(fit.coef(3) == Approx(0.0).margin(1e-10));
  // residual orthogonality X'e = 0
  REQUIRE((x.transpose() * fit.residuals).norm() < 1e-8);
}

TEST_CASE("zero-lag newey-west equals white standard errors") {
  math::Rng rng(7);
  const int n = 80;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.gaussian();
    x(i, 2) = rng.gaussian();
    y(i) = 0.3 + 0.7 * x(i, 1) - 0.2 * x(i, 2) + 0.5 * rng.gaussian();
  }
  const HarFit fit = fit_har(make_design(x, y, {"c", "a", "b"}), 0);

  // independent White sandwich
  const Eigen::MatrixXd inv = (x.transpose() * x).inverse();
  const Eigen::VectorXd beta = inv * x.transpose() * y;
  const Eigen::VectorXd e = y - x * beta;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
  for (int t = 0; t < n; ++t)
    meat += e(t) * e(t) * x.row(t).transpose() * x.row(t);
  const Eigen::MatrixXd cov = inv * meat * inv;
  for (int j = 0; j < 3; ++j)
    REQUIRE(fit.se(j) == Approx(std::sqrt(cov(j, j))).epsilon(1e-10));
}

TEST_CASE("fixed 50-row dataset matches the textbook bartlett oracle to 1e-8") {
  math::Rng rng(50);
  const int n = 50, lags = 4;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  double ar = 0.0;
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.gaussian();
    x(i, 2) = 0.5 * rng.gaussian() + 0.2;
    ar = 0.6 * ar + rng.gaussian();  // serially correlated noise
    y(i) = 1.0 - 0.4 * x(i, 1) + 0.9 * x(i, 2) + 0.3 * ar;
  }
  const HarFit fit = fit_har(make_design(x, y, {"c", "a", "b"}), lags);

  // independent route: explicit inverse and the full double-sum sandwich
  const Eigen::MatrixXd inv = (x.transpose() * x).fullPivLu().inverse();
  const Eigen::VectorXd beta = inv * (x.transpose() * y);
  const Eigen::VectorXd e = y - x * beta;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
  for (int t = 0; t < n; ++t)
    for (int s = 0; s < n; ++s) {
      const int gap = std::abs(t - s);
      if (gap > lags) continue;
      const double w = 1.0 - static_cast<double>(gap) / (lags + 1.0);
      meat += w * e(t) * e(s) * x.row(t).transpose() * x.row(s);
    }
  const Eigen::MatrixXd cov = inv * meat * inv;

  for (int j = 0; j < 3; ++j) {
    REQUIRE(fit.coef(j) == Approx(beta(j)).margin(1e-8));
    REQUIRE(fit.se(j) == Approx(std::sqrt(cov(j, j))).margin(1e-8));
  }
}

TEST_CASE("rank-deficient design names the collinear column") {
  Eigen::MatrixXd x(20, 3);
  Eigen::VectorXd y(20);
  math::Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.uniform();
    x(i, 2) = 2.0 * x(i, 1);  // collinear with column "a"
    y(i) = rng.uniform();
  }
  REQUIRE_THROWS_WITH(fit_har(make_design(x, y, {"c", "a", "dup"}), 0),
                      Catch::Matchers::ContainsSubstring("collinear"));
}

TEST_CASE("nested designs never lose unadjusted r-squared") {
  math::Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 40;
    Eigen::MatrixXd xb(n, 3), xe(n, 4);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      xb(i, 0) = 1.0;
      xb(i, 1) = rng.gaussian();
      xb(i, 2) = rng.gaussian();
      xe.row(i).head(3) = xb.row(i);
      xe(i, 3) = rng.gaussian();
      y(i) = 0.2 + xb(i, 1) - 0.5 * xb(i, 2) + rng.gaussian();
    }
    const HarFit base = fit_har(make_design(xb, y, {"c", "a", "b"}), 0);
    const HarFit ext = fit_har(make_design(xe, y, {"c", "a", "b", "z"}), 0);
    REQUIRE(ext.r2 >= base.r2 - 1e-12);
    REQUIRE(ext.adj_r2 <= ext.r2 + 1e-12);
  }
}

TEST_CASE("har design rows align regressors before the target window") {
  std::vector<double> logs;
  for (int i = 0; i < 40; ++i) logs.push_back(-3.0 + 0.01 * i);
  const data::RVSeries rv = series_from_logs(logs);
  const HarDesign d1 = build_har_design(rv, 1, "HAR-RV", std::nullopt, "");
  // first usable origin is index 21 (rv22 defined), last is n-2
  REQUIRE(d1.x.rows() == 40 - 21 - 1);
  REQUIRE(d1.y(0) == Approx(logs[22]));
  REQUIRE(d1.x(0, 1) == Approx(logs[21]));
  REQUIRE(d1.x(0, 3) == Approx(rv.rv22[21]));

  const HarDesign d3 = build_har_design(rv, 3, "HAR-RV", std::nullopt, "");
  REQUIRE(d3.y(0) == Approx(logs[22] + logs[23] + logs[24]));

  // exogenous column lags by construction: value dated at the origin
  DailySeries exo;
  for (std::size_t i = 0; i < rv.size(); ++i) exo[rv.dates[i]] = 100.0 + i;
  const HarDesign dx = build_har_design(rv, 1, "HAR-RV-VIX", exo, "vix");
  REQUIRE(dx.columns.size() == 5);
  REQUIRE(dx.x(0, 4) == Approx(100.0 + 21.0));

  REQUIRE_THROWS_AS(build_har_design(rv, 0, "x", std::nullopt, ""), DomainError);
  REQUIRE_THROWS_AS(build_har_design(rv, 23, "x", std::nullopt, ""), DomainError);
}

TEST_CASE("near-constant series forecasts the in-sample target mean") {
  math::Rng rng(9);
  std::vector<double> logs;
  for (int i = 0; i < 60; ++i) logs.push_back(-3.0 + 1e-3 * rng.gaussian());
  const data::RVSeries rv = series_from_logs(logs);
  const HarDesign d = build_har_design(rv, 1, "HAR-RV", std::nullopt, "");
  const HarFit fit = fit_har(d, 0);
  const double fitted = forecast_h(fit, d.x.row(0), 1);
  REQUIRE(fitted == Approx(d.y.mean()).margin(1e-2));
}

TEST_CASE("ar(1) log-rv forecasts beat the unconditional mean for h <= 5") {
  math::Rng rng(77);
  std::vector<double> logs;
  double state = 0.0;
  for (int i = 0; i < 400; ++i) {
    state = 0.9 * state + 0.3 * rng.gaussian();
    logs.push_back(-3.0 + state);
  }
  const data::RVSeries rv = series_from_logs(logs);
  for (int h = 1; h <= 5; ++h) {
    const HarDesign d = build_har_design(rv, h, "HAR-RV", std::nullopt, "");
    const HarFit fit = fit_har(d);
    double model_sse = 0.0, mean_sse = 0.0;
    const double ybar = d.y.mean();
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
      const double pred = forecast_h(fit, d.x.row(i), h);
      model_sse += (pred - d.y(i)) * (pred - d.y(i));
      mean_sse += (ybar - d.y(i)) * (ybar - d.y(i));
    }
    REQUIRE(model_sse < mean_sse);
  }
}

TEST_CASE("qlike identities") {
  std::vector<double> a{-3.0, -2.5, -3.2};
  REQUIRE(qlike(a, a) == 0.0);

  std::vector<double> actual{std::log(2.0)}, pred{0.0};
  REQUIRE(qlike(actual, pred) == Approx(1.0 - std::log(2.0)).margin(1e-12));

  math::Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x{rng.gaussian()}, y{rng.gaussian()};
    REQUIRE(qlike(x, y) >= 0.0);
  }
  std::vector<double> too_short{1.0, 2.0};
  REQUIRE_THROWS_AS(qlike(a, too_short), DomainError);
}

TEST_CASE("mda trivial and hand-enumerated cases") {
  std::vector<double> actual{1.0, 2.0, 1.5, 1.7, 1.2};
  std::vector<double> prev{0.9, 1.0, 2.0, 1.5, 1.7};
  REQUIRE(mda(actual, actual, prev) == 1.0);

  std::vector<double> opposite(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i)
    opposite[i] = prev[i] - (actual[i] - prev[i]);
  REQUIRE(mda(actual, opposite, prev) == 0.0);

  // hand enumeration:
  // actual changes: +0.1, +1.0, -0.5, +0.2, -0.5
  // pred changes:   +0.3, -0.1, -0.4, -0.3, -0.3
  // agreement:      yes,  no,   yes,  no,   yes  -> 3/5
  std::vector<double> pred{1.2, 0.9, 1.6, 1.2, 1.4};
  REQUIRE(mda(actual, pred, prev) == Approx(0.6));
}

TEST_CASE("mda is invariant under positive affine maps of the levels") {
  math::Rng rng(31);
  std::vector<double> actual(40), pred(40), prev(40);
  for (std::size_t i = 0; i < 40; ++i) {
    actual[i] = rng.gaussian();
    pred[i] = rng.gaussian();
    prev[i] = rng.gaussian();
  }
  const double base = mda(actual, pred, prev);
  std::vector<double> a2(40), p2(40), v2(40);
  for (std::size_t i = 0; i < 40; ++i) {
    a2[i] = 2.5 * actual[i] + 1.0;
    p2[i] = 2.5 * pred[i] + 1.0;
    v2[i] = 2.5 * prev[i] + 1.0;
  }
  REQUIRE(mda(a2, p2, v2) == Approx(base));
}

TEST_CASE("dm test: antisymmetry, degenerate case, oracle value") {
  math::Rng rng(88);
  std::vector<double> la(100), lb(100);
  for (std::size_t i = 0; i < 100; ++i) {
    la[i] = std::abs(rng.gaussian());
    lb[i] = std::abs(rng.gaussian()) * 1.1;
  }
  const DmResult ab = dm_test(la, lb);
  const DmResult ba = dm_test(lb, la);
  REQUIRE(ab.statistic == Approx(-ba.statistic).epsilon(1e-12));

  REQUIRE_THROWS_AS(dm_test(la, la), NumericError);

  // independent mean / se computation at zero lags
  double mean = 0.0;
  for (std::size_t i = 0; i < 100; ++i) mean += la[i] - lb[i];
  mean /= 100.0;
  double var = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const double d = la[i] - lb[i] - mean;
    var += d * d;
  }
  var /= 100.0;
  const double expected = mean / std::sqrt(var / 100.0);
  REQUIRE(ab.statistic == Approx(expected).margin(1e-8));
}

TEST_CASE("dm sign convention: strictly dominated losses give negative stat") {
  std::vector<double> better(60), worse(60);
  math::Rng rng(5);
  for (std::size_t i = 0; i < 60; ++i) {
    better[i] = std::abs(rng.gaussian());
    worse[i] = better[i] + 0.2 + 0.05 * std::abs(rng.gaussian());
  }
  const DmResult dm = dm_test(better, worse);
  REQUIRE(dm.statistic < 0.0);
  REQUIRE(dm.p_value < 0.01);
  REQUIRE(std::string(significance_stars(dm.p_value)) == "***");
}

TEST_CASE("evaluate: perfect single model and definitional identities") {
  std::map<std::string, std::map<int, ForecastSeries>> forecasts;
  ForecastSeries s;
  s.actual = {-3.0, -2.8, -3.1, -2.9};
  s.predicted = s.actual;
  s.prev_actual = {-3.1, -3.0, -2.8, -3.1};
  forecasts["HAR-RV"][1] = s;

  const EvalReport report = evaluate(forecasts, {1});
  const HorizonMetrics& m = report.metrics.at("HAR-RV").at(1);
  REQUIRE(m.mae == 0.0);
  REQUIRE(m.qlike == 0.0);
  REQUIRE(m.mda == 1.0);
  REQUIRE(report.dm_stat.empty());
  REQUIRE(m.rmse * m.rmse == Approx(m.mse).margin(1e-12));
}

TEST_CASE("evaluate: dominated model shows a negative dm cell and missing horizons") {
  math::Rng rng(19);
  ForecastSeries good, bad;
  for (int i = 0; i < 50; ++i) {
    const double actual = -3.0 + 0.3 * rng.gaussian();
    good.actual.push_back(actual);
    bad.actual.push_back(actual);
    good.prev_actual.push_back(actual - 0.1);
    bad.prev_actual.push_back(actual - 0.1);
    const double noise = rng.gaussian();
    good.predicted.push_back(actual + 0.05 * noise);
    bad.predicted.push_back(actual + 0.05 * noise + (noise > 0 ? 0.3 : -0.3));
  }
  std::map<std::string, std::map<int, ForecastSeries>> forecasts;
  forecasts["A"][1] = good;
  forecasts["B"][1] = bad;

  const EvalReport report = evaluate(forecasts, {1, 2});
  REQUIRE(report.models == std::vector<std::string>{"A", "B"});
  REQUIRE(report.dm_stat[0][1] < 0.0);
  REQUIRE(report.dm_stat[1][0] > 0.0);
  REQUIRE(report.missing.size() == 2);  // horizon 2 absent for both
  REQUIRE(report.metrics.at("A").at(1).mae < report.metrics.at("B").at(1).mae);
}
