#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotvol/data/dates.hpp"
#include "spotvol/errors.hpp"
#include "spotvol/inference/pricing_backend.hpp"
#include "spotvol/math/brent.hpp"
#include "spotvol/math/nelder_mead.hpp"
#include "spotvol/models/params.hpp"
#include "spotvol/parallel.hpp"

namespace spotvol::inference {

struct InferenceConfig {
  double lambda_n = 0.2;          // vol-fit penalty weight
  int max_outer_iter = 20;
  double objective_tol = 1e-4;    // relative decrease stopping rule
  double v_lower = 1e-6;
  double v_upper = 4.0;
  double brent_tol = 1e-7;
  int nm_max_evals = 150;
  std::string backend = "quadrature";  // or "surrogate"

  void validate() const {
    if (lambda_n < 0.0) throw ConfigError("inference: lambda_n must be >= 0");
    if (max_outer_iter < 1) throw ConfigError("inference: max_outer_iter must be >= 1");
    if (!(objective_tol > 0.0) || !(brent_tol > 0.0))
      throw ConfigError("inference: tolerances must be > 0");
    if (backend != "quadrature" && backend != "surrogate")
      throw ConfigError("inference: unknown backend \"" + backend + "\"");
  }
};

// Free structural coordinates for one model family, with box bounds for the
// simplex search. The day-level variance is latent, never structural.
struct ParamSpace {
  std::vector<std::string> names;
  std::vector<double> lo, hi;

  std::vector<double> clamp(std::vector<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::min(std::max(x[i], lo[i] * 1.0 + (hi[i] - lo[i]) * 1e-6),
                      hi[i] - (hi[i] - lo[i]) * 1e-6);
    return x;
  }
};

inline ParamSpace param_space(const models::ModelParams& model,
                              const std::optional<surrogate::TrainingBox>& box) {
  ParamSpace s;
  auto add = [&](const std::string& name, double lo, double hi) {
    s.names.push_back(name);
    s.lo.push_back(lo);
    s.hi.push_back(hi);
  };
  const bool rough = std::holds_alternative<models::RoughHestonParams>(model);
  if (box && !rough)
    throw ConfigError("surrogate box bounds apply to rough_heston only");
  if (box) {
    add("lambda", box->lo[0], box->hi[0]);
    add("theta", box->lo[1], box->hi[1]);
    add("nu", box->lo[2], box->hi[2]);
    add("rho", box->lo[3], box->hi[3]);
  } else {
    add("lambda", 0.1, 12.0);
    add("theta", 0.001, 0.5);
    add("nu", 0.05, 2.0);
    add("rho", -0.99, 0.3);
  }
  if (rough) add("hurst", box ? box->lo[5] : 0.02, box ? box->hi[5] : 0.49);
  if (std::holds_alternative<models::BatesParams>(model) ||
      std::holds_alternative<models::SvcjParams>(model)) {
    add("eta", 0.01, 5.0);
    add("mu_s", -0.5, 0.2);
    add("sigma_s", 0.01, 0.5);
  }
  if (std::holds_alternative<models::SvcjParams>(model)) add("mu_v", 0.001, 0.5);
  return s;
}

inline std::vector<double> pack_params(const models::ModelParams& model) {
  const models::HestonParams& d = models::diffusion_of(model);
  std::vector<double> x{d.lambda, d.theta, d.nu, d.rho};
  if (const auto* r = std::get_if<models::RoughHestonParams>(&model))
    x.push_back(r->hurst);
  if (const auto* b = std::get_if<models::BatesParams>(&model)) {
    x.push_back(b->jumps.eta);
    x.push_back(b->jumps.mu_s);
    x.push_back(b->jumps.sigma_s);
  }
  if (const auto* v = std::get_if<models::SvcjParams>(&model)) {
    x.push_back(v->jumps.eta);
    x.push_back(v->jumps.mu_s);
    x.push_back(v->jumps.sigma_s);
    x.push_back(v->jumps.mu_v);
  }
  return x;
}

inline models::ModelParams unpack_params(const models::ModelParams& tmpl,
                                         const std::vector<double>& x) {
  models::ModelParams out = tmpl;
  std::visit([&](auto& p) {
    using T = std::decay_t<decltype(p)>;
    if constexpr (std::is_same_v<T, models::HestonParams>) {
      p.lambda = x[0];
      p.theta = x[1];
      p.nu = x[2];
      p.rho = x[3];
    } else if constexpr (std::is_same_v<T, models::RoughHestonParams>) {
      p.base.lambda = x[0];
      p.base.theta = x[1];
      p.base.nu = x[2];
      p.base.rho = x[3];
      p.hurst = x[4];
      p.alpha = x[4] + 0.5;
    } else if constexpr (std::is_same_v<T, models::BatesParams>) {
      p.diffusion.lambda = x[0];
      p.diffusion.theta = x[1];
      p.diffusion.nu = x[2];
      p.diffusion.rho = x[3];
      p.jumps.eta = x[4];
      p.jumps.mu_s = x[5];
      p.jumps.sigma_s = x[6];
    } else if constexpr (std::is_same_v<T, models::SvcjParams>) {
      p.diffusion.lambda = x[0];
      p.diffusion.theta = x[1];
      p.diffusion.nu = x[2];
      p.diffusion.rho = x[3];
      p.jumps.eta = x[4];
      p.jumps.mu_s = x[5];
      p.jumps.sigma_s = x[6];
      p.jumps.mu_v = x[7];
    } else {
      throw ConfigError("inference: lifted_heston is priced via rough_heston");
    }
  }, out);
  return out;
}

struct DayInference {
  data::Date date = 0;
  double v_hat = 0.0;
  double objective = 0.0;   // option fit + penalty at the minimiser
  double option_rmse = 0.0; // sqrt(mean((C - C_model)^2 / vega^2)), vol units
  bool usable = false;
};

// Vega-weighted option-fit mean square for one day at (theta, v).
inline double option_fit(const PricingBackend& backend,
                         const models::ModelParams& theta, double v,
                         const DayQuotes& day, std::vector<double>& scratch) {
  backend.price_day(theta, v, day, scratch);
  double acc = 0.0;
  for (std::size_t i = 0; i < day.size(); ++i) {
    const double e = (day.market[i] - scratch[i]) / day.vega[i];
    acc += e * e;
  }
  return acc / static_cast<double>(day.size());
}

// Step 1: one-dimensional penalized fit of the day's spot variance,
//   min_v (1/N) sum ((C_j - C_j(theta, v))/vega_j)^2
//         + lambda_n (sqrt(anchor) - sqrt(v))^2
// over v in [v_lower, v_upper], by Brent search.
inline DayInference infer_spot_day(const PricingBackend& backend,
                                   const DayQuotes& day,
                                   const models::ModelParams& theta,
                                   const InferenceConfig& config) {
  config.validate();
  DayInference result;
  result.date = day.date;
  if (day.size() == 0 || !day.has_anchor || !(day.anchor_var > 0.0)) return result;

  const double sqrt_anchor = std::sqrt(day.anchor_var);
  std::vector<double> scratch;
  try {
    auto objective = [&](double v) {
      const double fit = option_fit(backend, theta, v, day, scratch);
      const double gap = sqrt_anchor - std::sqrt(v);
      return fit + config.lambda_n * gap * gap;
    };
    const auto [v_hat, f_hat] =
        math::brent_minimize(objective, config.v_lower, config.v_upper,
                             config.brent_tol);
    result.v_hat = v_hat;
    result.objective = f_hat;
    result.option_rmse = std::sqrt(option_fit(backend, theta, v_hat, day, scratch));
    result.usable = true;
  } catch (const std::exception&) {
    result.usable = false;  // day excluded from the structural step
  }
  return result;
}

struct StructuralResult {
  models::ModelParams theta;
  double objective = 0.0;  // (1/N) sum of vega-weighted squared errors
  bool improved = false;
  bool stagnated = false;
};

// Step 2: derivative-free simplex refinement of the structural parameters at
// fixed daily variances. Returns the incoming theta when no improvement is
// found.
inline StructuralResult estimate_structural(
    const PricingBackend& backend, const std::vector<DayQuotes>& days,
    const std::vector<DayInference>& spot, const models::ModelParams& theta0,
    const InferenceConfig& config,
    const std::optional<surrogate::TrainingBox>& surrogate_box = std::nullopt) {
  config.validate();
  const ParamSpace space = param_space(theta0, surrogate_box);

  std::size_t total_quotes = 0;
  for (std::size_t d = 0; d < days.size(); ++d)
    if (spot[d].usable) total_quotes += days[d].size();
  if (total_quotes == 0) throw DataError("estimate_structural: no usable days");

  auto aggregate = [&](const models::ModelParams& theta) {
    std::vector<double> day_sums(days.size(), 0.0);
    std::vector<int> failed(days.size(), 0);
    parallel_for(days.size(), [&](std::size_t d) {
      if (!spot[d].usable) return;
      std::vector<double> scratch;
      try {
        day_sums[d] = option_fit(backend, theta, spot[d].v_hat, days[d], scratch) *
                      static_cast<double>(days[d].size());
      } catch (const std::exception&) {
        failed[d] = 1;
      }
    });
    double acc = 0.0;
    for (std::size_t d = 0; d < days.size(); ++d) {
      if (failed[d]) return std::numeric_limits<double>::infinity();
      acc += day_sums[d];
    }
    return acc / static_cast<double>(total_quotes);
  };

  StructuralResult result;
  result.theta = theta0;
  const double incoming = aggregate(theta0);
  result.objective = incoming;

  if (config.nm_max_evals <= 0) {
    result.stagnated = true;
    return result;  // zero-budget refinement keeps the incoming parameters
  }

  math::BoxedNelderMead nm(space.lo, space.hi);
  auto objective = [&](const std::vector<double>& x) {
    return aggregate(unpack_params(theta0, x));
  };
  const auto nm_result =
      nm.minimize(objective, space.clamp(pack_params(theta0)), config.nm_max_evals);

  if (nm_result.fx < incoming) {
    result.theta = unpack_params(theta0, nm_result.x);
    result.objective = nm_result.fx;
    result.improved = true;
  } else {
    result.stagnated = true;
  }
  return result;
}

struct SpotVariancePath {
  std::vector<data::Date> dates;
  std::vector<double> v_hat;
  std::vector<double> option_rmse;
  std::vector<bool> usable;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["dates"] = dates;
    j["v_hat"] = v_hat;
    j["option_rmse"] = option_rmse;
    std::vector<int> flags(usable.begin(), usable.end());
    j["usable"] = flags;
    return j;
  }
};

struct FitDiagnostics {
  std::vector<double> objective_trajectory;  // overall objective per outer iter
  std::vector<double> ivrmse_trajectory;
  std::vector<nlohmann::json> theta_trajectory;
  int outer_iterations = 0;
  bool converged = false;

  nlohmann::json to_json() const {
    return nlohmann::json{{"objective", objective_trajectory},
                          {"ivrmse", ivrmse_trajectory},
                          {"theta", theta_trajectory},
                          {"outer_iterations", outer_iterations},
                          {"converged", converged}};
  }
};

struct TwoStepResult {
  models::ModelParams theta;
  SpotVariancePath path;
  FitDiagnostics diagnostics;
};

// Alternates the per-day variance fit (step 1) and the structural refinement
// (step 2) until the overall penalized objective stops decreasing.
inline TwoStepResult two_step_iterate(const PricingBackend& backend,
                                      const std::vector<DayQuotes>& days,
                                      const models::ModelParams& theta0,
                                      const InferenceConfig& config,
                                      const std::optional<surrogate::TrainingBox>&
                                          surrogate_box = std::nullopt) {
  config.validate();
  if (days.empty()) throw DataError("two_step_iterate: no panel days");
  models::validate(theta0);

  TwoStepResult result;
  result.theta = theta0;
  std::vector<DayInference> spot(days.size());

  double prev_objective = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < config.max_outer_iter; ++iter) {
    // Step 1: independent one-dimensional problems, parallel across days
    parallel_for(days.size(), [&](std::size_t d) {
      spot[d] = infer_spot_day(backend, days[d], result.theta, config);
    });

    double overall = 0.0, fit_sq = 0.0;
    std::size_t usable_days = 0, usable_quotes = 0;
    for (std::size_t d = 0; d < days.size(); ++d) {
      if (!spot[d].usable) continue;
      overall += spot[d].objective;
      fit_sq += spot[d].option_rmse * spot[d].option_rmse *
                static_cast<double>(days[d].size());
      usable_quotes += days[d].size();
      ++usable_days;
    }
    if (usable_days == 0) throw DataError("two_step_iterate: no usable days");
    if (!std::isfinite(overall))
      throw NumericError("two_step_iterate: non-finite objective at iteration " +
                         std::to_string(iter));
    result.diagnostics.objective_trajectory.push_back(overall);
    result.diagnostics.ivrmse_trajectory.push_back(
        std::sqrt(fit_sq / static_cast<double>(usable_quotes)));
    result.diagnostics.theta_trajectory.push_back(models::to_json(result.theta));
    result.diagnostics.outer_iterations = iter + 1;

    if (iter > 0 &&
        prev_objective - overall <= config.objective_tol * std::abs(prev_objective)) {
      result.diagnostics.converged = true;
      break;
    }
    prev_objective = overall;

    if (iter + 1 < config.max_outer_iter) {
      const StructuralResult structural = estimate_structural(
          backend, days, spot, result.theta, config, surrogate_box);
      if (!structural.improved) {
        result.diagnostics.converged = true;
        break;
      }
      result.theta = structural.theta;
    }
  }

  result.path.dates.reserve(days.size());
  for (std::size_t d = 0; d < days.size(); ++d) {
    result.path.dates.push_back(days[d].date);
    result.path.v_hat.push_back(spot[d].v_hat);
    result.path.option_rmse.push_back(spot[d].option_rmse);
    result.path.usable.push_back(spot[d].usable);
  }
  return result;
}

}  // namespace spotvol::inference
