#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spotvol/errors.hpp"
#include "spotvol/models/lifted_chf.hpp"
#include "spotvol/models/lifted_kernel.hpp"
#include "spotvol/models/params.hpp"
#include "spotvol/parallel.hpp"
#include "spotvol/pricing/black_scholes.hpp"
#include "spotvol/pricing/fourier.hpp"

namespace spotvol::surrogate {

inline constexpr int kInputDim = 8;
inline const std::array<const char*, kInputDim> kInputNames = {
    "lambda", "theta", "nu", "rho", "v0", "hurst", "moneyness", "maturity"};

// Axis-aligned training box over (lambda, theta, nu, rho, v0, hurst, k, tau).
// Moneyness is forward moneyness K/F; the pricing underneath is done at zero
// rates on a unit spot, which the forward normalisation makes equivalent.
struct TrainingBox {
  std::array<double, kInputDim> lo{0.5, 0.005, 0.1, -0.95, 0.005, 0.05, 0.7, 7.0 / 365.0};
  std::array<double, kInputDim> hi{8.0, 0.25, 1.5, 0.0, 0.3, 0.45, 1.3, 1.0};

  void validate() const {
    for (int i = 0; i < kInputDim; ++i)
      if (!(lo[i] < hi[i])) throw DomainError("training box: lo must be < hi");
  }

  bool contains(const std::array<double, kInputDim>& x) const {
    for (int i = 0; i < kInputDim; ++i)
      if (x[i] < lo[i] - 1e-12 || x[i] > hi[i] + 1e-12) return false;
    return true;
  }

  bool operator==(const TrainingBox&) const = default;
};

struct SurrogateSample {
  std::array<double, kInputDim> x{};
  double iv = 0.0;     // Black-Scholes implied vol of the lifted-Heston price
  double price = 0.0;  // the quadrature price behind it (unit spot, zero rate)
};

struct DatasetResult {
  std::vector<SurrogateSample> samples;
  std::size_t attempted = 0;
  std::size_t dropped = 0;   // pricing machinery failures
  std::size_t rejected = 0;  // implied vol not identifiable at that point
};

namespace detail {

inline constexpr std::array<int, 16> kHaltonPrimes = {2,  3,  5,  7,  11, 13,
                                                      17, 19, 23, 29, 31, 37,
                                                      41, 43, 47, 53};

inline double halton(std::uint64_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
  }
  return r;
}

}  // namespace detail

// Moneyness wedge where the price-to-implied-vol map is well conditioned:
// strikes are drawn in standardised moneyness m = log k / sqrt(v_bar tau)
// with m in [-4.5, +4.5 of the upside scale], then clipped to the box.
// Under strong negative spot-vol correlation the up-tail thins out like
// sqrt(1 - rho^2), so the call wing is narrowed accordingly; outside the
// wedge the Black-Scholes vega underflows and an implied-vol target carries
// no information.
struct MoneynessWedge {
  double log_lo = 0.0;
  double log_hi = 0.0;
};

inline MoneynessWedge moneyness_wedge(double v0, double theta, double rho,
                                      double tau) {
  const double v_bar = 0.5 * (v0 + theta);
  const double scale = std::sqrt(v_bar * tau);
  const double up = std::sqrt(std::max(0.15, 1.0 - rho * rho));
  return MoneynessWedge{-4.5 * scale, 4.5 * up * scale};
}

// Low-discrepancy dataset for the lifted-Heston pricing map. Parameter/
// maturity combinations come from a seeded Halton stream (maturity sampled
// log-uniformly so the short end is resolved); each combination is priced
// once per strike through a shared Fourier grid, then inverted to
// Black-Scholes implied vol. Failed pricings (bound violations, quadrature
// trouble) are dropped and counted; more than 1% failures aborts.
inline DatasetResult generate_dataset(const TrainingBox& box, std::size_t n_samples,
                                      std::uint64_t seed,
                                      int strikes_per_surface = 16,
                                      int kernel_factors = 20,
                                      double kernel_spacing = 2.5) {
  box.validate();
  if (strikes_per_surface < 1)
    throw DomainError("generate_dataset: strikes_per_surface must be >= 1");
  DatasetResult result;
  if (n_samples == 0) return result;

  const std::size_t n_surfaces =
      (n_samples + static_cast<std::size_t>(strikes_per_surface) - 1) /
      static_cast<std::size_t>(strikes_per_surface);
  const std::uint64_t offset = 4096 + (seed % 1000003) * 131;

  struct SurfaceOut {
    std::vector<SurrogateSample> samples;
    std::size_t attempted = 0, dropped = 0, rejected = 0;
  };
  std::vector<SurfaceOut> outputs(n_surfaces);

  parallel_for(n_surfaces, [&](std::size_t s) {
    SurfaceOut& out = outputs[s];
    const std::uint64_t h_index = offset + s;
    std::array<double, kInputDim> x{};
    // dims 0..5: model params, dim 7: maturity. Strikes fill dim 6 below.
    for (int d = 0; d < 6; ++d)
      x[static_cast<std::size_t>(d)] =
          box.lo[static_cast<std::size_t>(d)] +
          (box.hi[static_cast<std::size_t>(d)] - box.lo[static_cast<std::size_t>(d)]) *
              detail::halton(h_index, detail::kHaltonPrimes[static_cast<std::size_t>(d)]);
    // maturities: alternate log-uniform (resolves the short end) and
    // uniform (keeps the long end dense)
    const double u_tau = detail::halton(h_index, detail::kHaltonPrimes[7]);
    x[7] = (s % 2 == 0)
               ? box.lo[7] * std::pow(box.hi[7] / box.lo[7], u_tau)
               : box.lo[7] + (box.hi[7] - box.lo[7]) * u_tau;

    models::HestonParams p;
    p.lambda = x[0];
    p.theta = x[1];
    p.nu = x[2];
    p.rho = x[3];
    p.v0 = x[4];
    const double hurst = x[5];
    const double tau = x[7];

    out.attempted = static_cast<std::size_t>(strikes_per_surface);
    try {
      const models::LiftedKernel kernel =
          models::build_lifted_kernel(kernel_factors, hurst, kernel_spacing);
      models::LiftedChfSolver solver(p, kernel, tau);
      pricing::BatchCharFn chf = [&](std::span<const models::Complex> as) {
        std::vector<models::Complex> us(as.size());
        for (std::size_t i = 0; i < as.size(); ++i)
          us[i] = models::Complex(0.0, 1.0) * as[i];
        std::vector<models::Complex> expo = solver.log_chf(us);
        std::vector<models::Complex> vals(as.size());
        for (std::size_t i = 0; i < as.size(); ++i) vals[i] = std::exp(expo[i]);
        return vals;
      };
      const double max_logk = std::max(std::abs(std::log(box.lo[6])),
                                       std::abs(std::log(box.hi[6])));
      const pricing::FourierGrid grid =
          pricing::FourierGrid::build(chf, tau, max_logk);

      const MoneynessWedge wedge = moneyness_wedge(p.v0, p.theta, p.rho, tau);
      for (int j = 0; j < strikes_per_surface; ++j) {
        // stratified standardised moneyness with a Halton shift per stratum
        const double shift =
            detail::halton(h_index, detail::kHaltonPrimes[8 + (j % 6)]);
        const double frac = (j + shift) / static_cast<double>(strikes_per_surface);
        const double logk =
            std::clamp(wedge.log_lo + frac * (wedge.log_hi - wedge.log_lo),
                       std::log(box.lo[6]), std::log(box.hi[6]));
        const double k = std::exp(logk);
        try {
          const double price = grid.call_price(1.0, k, 0.0, 0.0, tau);
          pricing::ContractSpec c;
          c.spot = 1.0;
          c.strike = k;
          c.maturity = tau;
          c.is_call = true;
          if (!(price > c.lower_bound() + 1e-12 && price < c.upper_bound() - 1e-12)) {
            ++out.rejected;
            continue;
          }
          SurrogateSample sample;
          sample.x = x;
          sample.x[6] = k;
          sample.price = price;
          sample.iv = pricing::implied_vol(c, price);
          if (pricing::bs_vega(c, sample.iv) < 1e-6) {
            ++out.rejected;
            continue;
          }
          out.samples.push_back(sample);
        } catch (const std::exception&) {
          ++out.dropped;
        }
      }
    } catch (const std::exception&) {
      out.dropped = static_cast<std::size_t>(strikes_per_surface);
    }
  });

  for (auto& out : outputs) {
    result.attempted += out.attempted;
    result.dropped += out.dropped;
    result.rejected += out.rejected;
    for (auto& s : out.samples) {
      if (result.samples.size() < n_samples) result.samples.push_back(s);
    }
  }
  if (result.attempted > 0 &&
      static_cast<double>(result.dropped) > 0.01 * static_cast<double>(result.attempted)) {
    throw NumericError("generate_dataset: pricing failure rate above 1% (" +
                       std::to_string(result.dropped) + "/" +
                       std::to_string(result.attempted) + ")");
  }
  return result;
}

}  // namespace spotvol::surrogate
