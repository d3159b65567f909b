#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "spotvol/math/gauss_legendre.hpp"
#include "spotvol/math/rng.hpp"
#include "spotvol/models/chf.hpp"
#include "spotvol/models/fractional_chf.hpp"
#include "spotvol/models/heston_chf.hpp"
#include "spotvol/models/lifted_chf.hpp"
#include "spotvol/models/lifted_kernel.hpp"
#include "spotvol/models/params.hpp"

using namespace spotvol;
using namespace spotvol::models;
using Catch::Approx;

namespace {

HestonParams base_params() {
  return HestonParams{2.0, 0.04, 0.3, -0.7, 0.04};
}

// Random-but-valid parameter draws for property tests.
HestonParams random_heston(math::Rng& rng) {
  HestonParams p;
  p.lambda = 0.5 + 5.0 * rng.uniform();
  p.theta = 0.01 + 0.2 * rng.uniform();
  p.nu = 0.1 + 1.0 * rng.uniform();
  p.rho = -0.95 + 1.4 * rng.uniform();
  p.v0 = 0.01 + 0.2 * rng.uniform();
  return p;
}

JumpParams random_jumps(math::Rng& rng, bool variance_jumps) {
  JumpParams j;
  j.eta = 0.1 + 1.5 * rng.uniform();
  j.mu_s = -0.15 + 0.2 * rng.uniform();
  j.sigma_s = 0.02 + 0.2 * rng.uniform();
  j.mu_v = variance_jumps ? 0.01 + 0.2 * rng.uniform() : 0.0;
  return j;
}

}  // namespace

TEST_CASE("parameter validation rejects out-of-domain values") {
  HestonParams p = base_params();
  p.lambda = -1.0;
  REQUIRE_THROWS_AS(p.validate(), DomainError);
  p = base_params();
  p.rho = 1.5;
  REQUIRE_THROWS_AS(p.validate(), DomainError);

  RoughHestonParams r = RoughHestonParams::make(base_params(), 0.1);
  REQUIRE_NOTHROW(r.validate());
  r.alpha = 0.7;  // inconsistent with hurst
  REQUIRE_THROWS_AS(r.validate(), DomainError);
  REQUIRE_THROWS_AS(RoughHestonParams::make(base_params(), -0.1).validate(),
                    DomainError);
}

TEST_CASE("model params json round-trip") {
  ModelParams models[] = {
      ModelParams{base_params()},
      ModelParams{BatesParams{base_params(), JumpParams{0.5, -0.05, 0.1, 0.0}}},
      ModelParams{SvcjParams{base_params(), JumpParams{0.5, -0.05, 0.1, 0.05}}},
      ModelParams{RoughHestonParams::make(base_params(), 0.12)},
      ModelParams{LiftedHestonParams{RoughHestonParams::make(base_params(), 0.12), 20, 2.5}},
  };
  for (const auto& m : models) {
    const auto j = to_json(m);
    const ModelParams back = model_params_from_json(j);
    REQUIRE(model_label(back) == model_label(m));
    REQUIRE(diffusion_of(back).nu == Approx(diffusion_of(m).nu));
  }
  REQUIRE_THROWS_AS(model_params_from_json(nlohmann::json{{"model", "garch"}}),
                    DataError);
}

TEST_CASE("heston chf at zero frequency is one") {
  const Complex value = heston_chf(base_params(), std::nullopt, 0.0, 0.5, 0.02, 0.0);
  REQUIRE(std::abs(value - 1.0) < 1e-14);
}

TEST_CASE("chf normalisation, bound and hermitian symmetry on random draws") {
  math::Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const HestonParams p = random_heston(rng);
    const bool with_jumps = trial % 3 != 0;
    const bool variance_jumps = trial % 3 == 2;
    std::optional<JumpParams> jumps;
    if (with_jumps) jumps = random_jumps(rng, variance_jumps);
    const double tau = 0.05 + 1.5 * rng.uniform();

    REQUIRE(std::abs(heston_chf(p, jumps, 0.0, tau, 0.0, 0.0) - 1.0) < 1e-13);
    for (double a : {0.3, 1.7, 5.0, 21.0}) {
      const Complex plus = heston_chf(p, jumps, a, tau, 0.0, 0.0);
      const Complex minus = heston_chf(p, jumps, -a, tau, 0.0, 0.0);
      REQUIRE(std::abs(plus) <= 1.0 + 1e-12);
      REQUIRE(std::abs(minus - std::conj(plus)) < 1e-12);
    }
  }
}

TEST_CASE("martingale identity holds with active jump compensator") {
  math::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const HestonParams p = random_heston(rng);
    std::optional<JumpParams> jumps;
    if (trial % 3 == 1) jumps = random_jumps(rng, false);
    if (trial % 3 == 2) jumps = random_jumps(rng, true);
    const double tau = 0.1 + 1.4 * rng.uniform();
    const double r = 0.015, q = 0.004;
    const Complex value = heston_chf(p, jumps, Complex(0.0, -1.0), tau, r, q);
    REQUIRE(std::abs(value * std::exp(-(r - q) * tau) - 1.0) < 1e-6);
  }
}

TEST_CASE("svcj variance-jump integral matches quadrature oracle") {
  math::Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const HestonParams p = random_heston(rng);
    const double mu_v = 0.01 + 0.3 * rng.uniform();
    const double tau = 0.1 + 1.4 * rng.uniform();
    for (double a : {0.7, 3.0, 12.0}) {
      const Complex u = Complex(0.0, 1.0) * Complex(a, 0.0);
      const detail::HestonRiccati ric(p, u);
      const Complex closed = detail::exp_jump_integral(ric, mu_v, tau);

      // independent oracle: 64-point Gauss-Legendre of 1/(1 - mu_v D(s))
      const auto rule = math::gauss_legendre(64, 0.0, tau);
      Complex numeric = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        numeric += rule.weights[i] / (1.0 - mu_v * ric.D(rule.nodes[i]));
      REQUIRE(std::abs(closed - numeric) < 1e-9 * (1.0 + std::abs(numeric)));
    }
  }
}

TEST_CASE("lifted kernel: degenerate single factor") {
  const LiftedKernel k = build_lifted_kernel(1, 0.1, 2.5);
  REQUIRE(k.size() == 1);
  REQUIRE(k.weights[0] > 0.0);
  REQUIRE(k.value(0.3) == Approx(k.weights[0] * std::exp(-k.rates[0] * 0.3)));
}

TEST_CASE("lifted kernel rejects invalid inputs") {
  REQUIRE_THROWS_AS(build_lifted_kernel(0, 0.1, 2.5), DomainError);
  REQUIRE_THROWS_AS(build_lifted_kernel(5, 0.1, 1.0), DomainError);
  REQUIRE_THROWS_AS(build_lifted_kernel(5, 0.6, 2.5), DomainError);
}

TEST_CASE("kernel l2 distance decreases with factor count") {
  const double hurst = 0.1, alpha = hurst + 0.5;
  double prev = 1e9;
  for (int n : {1, 2, 5, 10, 20, 40}) {
    const LiftedKernel k = build_lifted_kernel(n, hurst, 2.5);
    const double dist = kernel_l2_distance(k, alpha);
    REQUIRE(dist < prev);
    prev = dist;
  }
  // spec example: n = 20 strictly better than n = 5
  const double d20 = kernel_l2_distance(build_lifted_kernel(20, 0.1, 2.5), alpha);
  const double d5 = kernel_l2_distance(build_lifted_kernel(5, 0.1, 2.5), alpha);
  REQUIRE(d20 < d5);
}

TEST_CASE("fractional chf at zero frequency is one") {
  const RoughHestonParams p = RoughHestonParams::make(base_params(), 0.1);
  const Complex value = fractional_chf(p, 0.0, 0.7, 128);
  REQUIRE(std::abs(value - 1.0) < 1e-13);
}

TEST_CASE("fractional chf at alpha = 1 reduces to classical heston") {
  const RoughHestonParams p = RoughHestonParams::make(base_params(), 0.5);
  REQUIRE(p.alpha == Approx(1.0));
  for (double tau : {0.25, 1.0}) {
    for (double a : {0.5, 2.0, 6.0}) {
      const Complex frac = fractional_chf(p, a, tau, 2048);
      const Complex classical = heston_chf(p.base, std::nullopt, a, tau, 0.0, 0.0);
      REQUIRE(std::abs(frac - classical) < 1e-6);
    }
  }
}

TEST_CASE("fractional chf self-convergence under grid doubling") {
  const RoughHestonParams p = RoughHestonParams::make(base_params(), 0.1);
  for (double tau : {0.2, 2.0}) {
    for (double a : {2.0, 50.0}) {
      const Complex coarse = fractional_chf(p, a, tau, 256);
      const Complex fine = fractional_chf(p, a, tau, 512);
      REQUIRE(std::abs(coarse - fine) < 1e-4);
    }
  }
}

TEST_CASE("lifted chf at zero frequency is one") {
  const RoughHestonParams p = RoughHestonParams::make(base_params(), 0.1);
  const LiftedKernel k = build_lifted_kernel(20, 0.1, 2.5);
  REQUIRE(std::abs(lifted_chf(p, k, 0.0, 0.5, 0.0) - 1.0) < 1e-12);
}

TEST_CASE("lifted chf with one zero-rate factor equals classical heston") {
  const RoughHestonParams p = RoughHestonParams::make(base_params(), 0.5);
  LiftedKernel degenerate;
  degenerate.weights = {1.0};
  degenerate.rates = {0.0};
  for (double tau : {0.2, 1.0}) {
    for (double a : {0.5, 2.0, 10.0}) {
      const Complex lifted = lifted_chf(p, degenerate, a, tau, 0.0);
      const Complex classical = heston_chf(p.base, std::nullopt, a, tau, 0.0, 0.0);
      REQUIRE(std::abs(lifted - classical) < 1e-8);
    }
  }
}

TEST_CASE("lifted chf agrees with the fractional solver") {
  const RoughHestonParams p = RoughHestonParams::make(base_params(), 0.1);
  const LiftedKernel k = build_lifted_kernel(20, 0.1, 2.5);
  // spec example: H = 0.1, n = 20, a = 2
  for (double tau : {0.25, 1.0}) {
    const Complex lifted = lifted_chf(p, k, 2.0, tau, 0.0);
    const Complex fractional_value = fractional_chf(p, 2.0, tau, 1024);
    REQUIRE(std::abs(lifted - fractional_value) < 1e-3);
  }
}

TEST_CASE("lifted chf martingale identity") {
  const RoughHestonParams p = RoughHestonParams::make(base_params(), 0.15);
  const LiftedKernel k = build_lifted_kernel(20, 0.15, 2.5);
  const double r = 0.02, tau = 0.75;
  const Complex value = lifted_chf(p, k, Complex(0.0, -1.0), tau, r);
  REQUIRE(std::abs(value * std::exp(-r * tau) - 1.0) < 1e-6);
}

TEST_CASE("lifted chf self-convergence in step count") {
  const RoughHestonParams p = RoughHestonParams::make(base_params(), 0.1);
  const LiftedKernel k = build_lifted_kernel(20, 0.1, 2.5);
  for (double a : {2.0, 30.0}) {
    const Complex coarse = lifted_chf(p, k, a, 1.0, 0.0, 256);
    const Complex fine = lifted_chf(p, k, a, 1.0, 0.0, 512);
    REQUIRE(std::abs(coarse - fine) < 1e-6);
  }
}

TEST_CASE("batch chf dispatch matches direct evaluators") {
  const ModelParams heston{base_params()};
  auto chf = make_chf(heston, 0.5, 0.01, 0.0);
  REQUIRE(std::abs(chf(1.5) -
                   heston_chf(base_params(), std::nullopt, 1.5, 0.5, 0.01, 0.0)) <
          1e-14);

  const RoughHestonParams rough = RoughHestonParams::make(base_params(), 0.1);
  const ModelParams rough_model{rough};
  auto chf_rough = make_chf(rough_model, 0.5, 0.01, 0.0);
  const LiftedKernel k = build_lifted_kernel(20, 0.1, 2.5);
  REQUIRE(std::abs(chf_rough(2.0) - lifted_chf(rough, k, 2.0, 0.5, 0.01)) < 1e-12);
}
