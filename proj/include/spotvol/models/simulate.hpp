#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "spotvol/errors.hpp"
#include "spotvol/math/rng.hpp"
#include "spotvol/models/lifted_kernel.hpp"
#include "spotvol/models/params.hpp"
#include "spotvol/parallel.hpp"

namespace spotvol::models {

inline constexpr int kTradingDaysPerYear = 252;

struct PathEnsemble {
  double dt = 0.0;         // year fraction per step
  int steps_per_day = 0;
  // log(S_t/S_0) and instantaneous variance on the step grid, per path;
  // index 0 is the initial point.
  std::vector<std::vector<double>> log_price;
  std::vector<std::vector<double>> variance;
};

namespace detail {

inline int poisson_small(math::Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  const double u = rng.uniform();
  double p = std::exp(-mean), cdf = p;
  int n = 0;
  while (u > cdf && n < 64) {
    ++n;
    p *= mean / n;
    cdf += p;
  }
  return n;
}

struct SimSpec {
  HestonParams diffusion;
  JumpParams jumps;             // eta = 0 when absent
  bool lifted = false;
  LiftedKernel kernel;          // only when lifted
  double rate = 0.0;
  double div = 0.0;
};

// One path under the classical AJD: full-truncation Euler, contemporaneous
// compound-Poisson jumps, price drift compensated by eta (E[e^{J_S}] - 1).
inline void simulate_classical_path(const SimSpec& spec, int n_steps, double dt,
                                    math::Rng& rng, std::vector<double>& log_price,
                                    std::vector<double>& variance) {
  const HestonParams& p = spec.diffusion;
  const JumpParams& j = spec.jumps;
  const double drift_base = spec.rate - spec.div - j.eta * j.price_compensator();
  const double sqrt_dt = std::sqrt(dt);
  const double rho_perp = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));

  double x = 0.0, v = p.v0;
  log_price[0] = x;
  variance[0] = v;
  for (int k = 1; k <= n_steps; ++k) {
    const double vp = std::max(v, 0.0);
    const double sv = std::sqrt(vp);
    const double zv = rng.gaussian();
    const double zp = rng.gaussian();
    const double dwv = zv * sqrt_dt;
    const double dwp = (p.rho * zv + rho_perp * zp) * sqrt_dt;

    x += (drift_base - 0.5 * vp) * dt + sv * dwp;
    v += p.lambda * (p.theta - vp) * dt + p.nu * sv * dwv;

    if (j.eta > 0.0) {
      const int n_jumps = poisson_small(rng, j.eta * dt);
      for (int q = 0; q < n_jumps; ++q) {
        x += j.mu_s + j.sigma_s * rng.gaussian();
        if (j.mu_v > 0.0) v += -j.mu_v * std::log(rng.uniform());
      }
    }
    log_price[k] = x;
    variance[k] = std::max(v, 0.0);
  }
}

// One path of the lifted model. The factor mean reversion is handled with
// exponential-Euler weights so widely spread rates stay stable at any step.
inline void simulate_lifted_path(const SimSpec& spec, int n_steps, double dt,
                                 math::Rng& rng, std::vector<double>& log_price,
                                 std::vector<double>& variance) {
  const HestonParams& p = spec.diffusion;
  const LiftedKernel& kernel = spec.kernel;
  const std::size_t n = kernel.size();
  const double sqrt_dt = std::sqrt(dt);
  const double rho_perp = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));

  std::vector<double> decay(n), load(n), factors(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = kernel.rates[i] * dt;
    decay[i] = std::exp(-z);
    load[i] = z > 1e-12 ? (1.0 - decay[i]) / z : 1.0;
  }
  auto g0 = [&](double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xr = kernel.rates[i];
      acc += kernel.weights[i] * (xr > 0.0 ? -std::expm1(-xr * t) / xr : t);
    }
    return p.v0 + p.lambda * p.theta * acc;
  };

  double x = 0.0;
  double v = p.v0;
  log_price[0] = x;
  variance[0] = v;
  for (int k = 1; k <= n_steps; ++k) {
    const double vp = std::max(v, 0.0);
    const double sv = std::sqrt(vp);
    const double zv = rng.gaussian();
    const double zp = rng.gaussian();
    const double shock = -p.lambda * vp * dt + p.nu * sv * zv * sqrt_dt;

    x += (spec.rate - spec.div - 0.5 * vp) * dt +
         sv * (p.rho * zv + rho_perp * zp) * sqrt_dt;

    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      factors[i] = decay[i] * factors[i] + load[i] * shock;
      weighted += kernel.weights[i] * factors[i];
    }
    v = g0(dt * k) + weighted;
    log_price[k] = x;
    variance[k] = std::max(v, 0.0);
  }
}

inline SimSpec make_sim_spec(const ModelParams& params,
                             const std::optional<LiftedKernel>& kernel,
                             double rate, double div) {
  validate(params);
  SimSpec spec;
  spec.diffusion = diffusion_of(params);
  spec.rate = rate;
  spec.div = div;
  if (const auto* b = std::get_if<BatesParams>(&params)) {
    spec.jumps = b->jumps;
  } else if (const auto* s = std::get_if<SvcjParams>(&params)) {
    spec.jumps = s->jumps;
  } else if (const auto* r = std::get_if<RoughHestonParams>(&params)) {
    spec.lifted = true;
    spec.kernel = kernel ? *kernel : build_lifted_kernel(20, r->hurst, 2.5);
  } else if (const auto* l = std::get_if<LiftedHestonParams>(&params)) {
    spec.lifted = true;
    spec.kernel =
        kernel ? *kernel
               : build_lifted_kernel(l->n_factors, l->rough.hurst, l->spacing);
  }
  return spec;
}

}  // namespace detail

// Euler-scheme path ensemble (log price, variance) with variance floored at
// zero inside the diffusion coefficients. Each path draws from its own seeded
// substream, so ensembles are reproducible regardless of thread count.
inline PathEnsemble simulate_paths(const ModelParams& params,
                                   const std::optional<LiftedKernel>& kernel,
                                   double horizon, int steps_per_day, int n_paths,
                                   std::uint64_t seed, double rate = 0.0,
                                   double div = 0.0) {
  if (steps_per_day < 1) throw DomainError("simulate_paths: steps_per_day must be >= 1");
  if (n_paths < 1) throw DomainError("simulate_paths: n_paths must be >= 1");
  if (!(horizon > 0.0)) throw DomainError("simulate_paths: horizon must be > 0");

  const detail::SimSpec spec = detail::make_sim_spec(params, kernel, rate, div);
  const double dt = 1.0 / (kTradingDaysPerYear * static_cast<double>(steps_per_day));
  const int n_steps = std::max(1, static_cast<int>(std::llround(horizon / dt)));

  PathEnsemble ensemble;
  ensemble.dt = dt;
  ensemble.steps_per_day = steps_per_day;
  ensemble.log_price.assign(static_cast<std::size_t>(n_paths),
                            std::vector<double>(n_steps + 1));
  ensemble.variance.assign(static_cast<std::size_t>(n_paths),
                           std::vector<double>(n_steps + 1));

  parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t path) {
    math::Rng rng = math::Rng::substream(seed, path);
    if (spec.lifted)
      detail::simulate_lifted_path(spec, n_steps, dt, rng,
                                   ensemble.log_price[path], ensemble.variance[path]);
    else
      detail::simulate_classical_path(spec, n_steps, dt, rng,
                                      ensemble.log_price[path], ensemble.variance[path]);
  });
  return ensemble;
}

// Terminal log(S_tau/S_0) only; memory-light variant for payoff averaging
// with large path counts.
inline std::vector<double> simulate_terminal_log_price(
    const ModelParams& params, const std::optional<LiftedKernel>& kernel,
    double tau, int n_steps, int n_paths, std::uint64_t seed, double rate = 0.0,
    double div = 0.0) {
  if (n_steps < 1) throw DomainError("simulate_terminal: n_steps must be >= 1");
  if (n_paths < 1) throw DomainError("simulate_terminal: n_paths must be >= 1");
  const detail::SimSpec spec = detail::make_sim_spec(params, kernel, rate, div);
  const double dt = tau / n_steps;

  std::vector<double> terminal(static_cast<std::size_t>(n_paths));
  const std::size_t block = 4096;
  const std::size_t blocks =
      (static_cast<std::size_t>(n_paths) + block - 1) / block;
  parallel_for(blocks, [&](std::size_t bi) {
    std::vector<double> lp(static_cast<std::size_t>(n_steps) + 1);
    std::vector<double> var(static_cast<std::size_t>(n_steps) + 1);
    const std::size_t lo = bi * block;
    const std::size_t hi = std::min(lo + block, static_cast<std::size_t>(n_paths));
    for (std::size_t path = lo; path < hi; ++path) {
      math::Rng rng = math::Rng::substream(seed, path);
      if (spec.lifted)
        detail::simulate_lifted_path(spec, n_steps, dt, rng, lp, var);
      else
        detail::simulate_classical_path(spec, n_steps, dt, rng, lp, var);
      terminal[path] = lp.back();
    }
  });
  return terminal;
}

}  // namespace spotvol::models
