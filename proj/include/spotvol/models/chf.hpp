#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "spotvol/models/fractional_chf.hpp"
#include "spotvol/models/heston_chf.hpp"
#include "spotvol/models/lifted_chf.hpp"
#include "spotvol/models/params.hpp"
#include "spotvol/pricing/fourier.hpp"

namespace spotvol::models {

// Characteristic-function handle for the pricer. Classical models evaluate
// their closed form per frequency; rough Heston is priced through its lifted
// approximation, whose ODE solver is shared across the whole frequency batch.
inline pricing::BatchCharFn make_batch_chf(const ModelParams& params, double tau,
                                           double rate, double div,
                                           int ode_steps = 0) {
  validate(params);
  if (const auto* h = std::get_if<HestonParams>(&params)) {
    HestonParams p = *h;
    return [p, tau, rate, div](std::span<const Complex> as) {
      std::vector<Complex> out(as.size());
      for (std::size_t i = 0; i < as.size(); ++i)
        out[i] = heston_chf(p, std::nullopt, as[i], tau, rate, div);
      return out;
    };
  }
  if (const auto* b = std::get_if<BatesParams>(&params)) {
    BatesParams p = *b;
    return [p, tau, rate, div](std::span<const Complex> as) {
      std::vector<Complex> out(as.size());
      for (std::size_t i = 0; i < as.size(); ++i)
        out[i] = heston_chf(p.diffusion, p.jumps, as[i], tau, rate, div);
      return out;
    };
  }
  if (const auto* s = std::get_if<SvcjParams>(&params)) {
    SvcjParams p = *s;
    return [p, tau, rate, div](std::span<const Complex> as) {
      std::vector<Complex> out(as.size());
      for (std::size_t i = 0; i < as.size(); ++i)
        out[i] = heston_chf(p.diffusion, p.jumps, as[i], tau, rate, div);
      return out;
    };
  }

  LiftedKernel kernel;
  HestonParams diffusion;
  if (const auto* r = std::get_if<RoughHestonParams>(&params)) {
    kernel = build_lifted_kernel(20, r->hurst, 2.5);
    diffusion = r->base;
  } else {
    const auto& l = std::get<LiftedHestonParams>(params);
    kernel = build_lifted_kernel(l.n_factors, l.rough.hurst, l.spacing);
    diffusion = l.rough.base;
  }
  auto solver = std::make_shared<LiftedChfSolver>(diffusion, kernel, tau, ode_steps);
  const double drift = (rate - div) * tau;
  return [solver, drift](std::span<const Complex> as) {
    std::vector<Complex> us(as.size());
    for (std::size_t i = 0; i < as.size(); ++i)
      us[i] = Complex(0.0, 1.0) * as[i];
    std::vector<Complex> exponents = solver->log_chf(us);
    std::vector<Complex> out(as.size());
    for (std::size_t i = 0; i < as.size(); ++i)
      out[i] = std::exp(us[i] * drift + exponents[i]);
    return out;
  };
}

inline pricing::CharFn make_chf(const ModelParams& params, double tau, double rate,
                                double div, int ode_steps = 0) {
  auto batch = make_batch_chf(params, tau, rate, div, ode_steps);
  return [batch](Complex a) {
    return batch(std::span<const Complex>(&a, 1))[0];
  };
}

}  // namespace spotvol::models
