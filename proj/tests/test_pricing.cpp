#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spotvol/math/rng.hpp"
#include "spotvol/models/chf.hpp"
#include "spotvol/pricing/black_scholes.hpp"
#include "spotvol/pricing/fourier.hpp"

using namespace spotvol;
using namespace spotvol::pricing;
using Catch::Approx;

namespace {

ContractSpec atm_contract() {
  ContractSpec c;
  c.spot = 100.0;
  c.strike = 100.0;
  c.maturity = 1.0;
  c.rate = 0.0;
  c.div_yield = 0.0;
  c.is_call = true;
  return c;
}

}  // namespace

TEST_CASE("black-scholes closed form at the textbook point") {
  // S=K=100, r=q=0, tau=1, sigma=0.2: C = 100 (2 N(0.1) - 1)
  const double expected = 100.0 * (2.0 * math::norm_cdf(0.1) - 1.0);
  REQUIRE(bs_price(atm_contract(), 0.2) == Approx(expected).epsilon(1e-12));
  REQUIRE(implied_vol(atm_contract(), expected) == Approx(0.2).margin(1e-8));
}

TEST_CASE("black-scholes put-call parity is exact") {
  math::Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    ContractSpec c;
    c.spot = 50.0 + 150.0 * rng.uniform();
    c.strike = c.spot * (0.6 + 0.8 * rng.uniform());
    c.maturity = 0.05 + 1.5 * rng.uniform();
    c.rate = 0.05 * rng.uniform();
    c.div_yield = 0.03 * rng.uniform();
    const double sigma = 0.05 + 0.5 * rng.uniform();
    c.is_call = true;
    const double call = bs_price(c, sigma);
    c.is_call = false;
    const double put = bs_price(c, sigma);
    const double fwd_gap = c.spot * std::exp(-c.div_yield * c.maturity) -
                           c.strike * std::exp(-c.rate * c.maturity);
    REQUIRE(call - put == Approx(fwd_gap).margin(1e-10 * c.spot));
  }
}

TEST_CASE("black-scholes zero-vol limit is discounted intrinsic") {
  ContractSpec c = atm_contract();
  c.strike = 80.0;
  c.rate = 0.02;
  const double intrinsic = c.spot - c.strike * std::exp(-c.rate * c.maturity);
  REQUIRE(bs_price(c, 0.0) == Approx(intrinsic).epsilon(1e-14));
  c.is_call = false;
  REQUIRE(bs_price(c, 0.0) == 0.0);
}

TEST_CASE("vega is positive, call/put symmetric and matches finite differences") {
  math::Rng rng(17);
  for (int i = 0; i < 30; ++i) {
    ContractSpec c;
    c.spot = 80.0 + 40.0 * rng.uniform();
    c.strike = c.spot * (0.7 + 0.6 * rng.uniform());
    c.maturity = 0.1 + 1.4 * rng.uniform();
    c.rate = 0.04 * rng.uniform();
    const double sigma = 0.1 + 0.4 * rng.uniform();

    c.is_call = true;
    const double v_call = bs_vega(c, sigma);
    c.is_call = false;
    const double v_put = bs_vega(c, sigma);
    REQUIRE(v_call > 0.0);
    REQUIRE(v_call == Approx(v_put).epsilon(1e-12));

    const double h = 1e-5;
    const double fd = (bs_price(c, sigma + h) - bs_price(c, sigma - h)) / (2.0 * h);
    REQUIRE(v_put == Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("implied vol round-trips over a random panel") {
  math::Rng rng(31);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    ContractSpec c;
    c.spot = 100.0;
    c.strike = 100.0 * (0.7 + 0.6 * rng.uniform());
    c.maturity = 7.0 / 365.0 + rng.uniform();
    c.rate = 0.03 * rng.uniform();
    c.div_yield = 0.02 * rng.uniform();
    c.is_call = rng.uniform() > 0.5;
    const double sigma = 0.05 + 0.75 * rng.uniform();
    const double price = bs_price(c, sigma);
    if (!(price > c.lower_bound() + 1e-12 && price < c.upper_bound() - 1e-12))
      continue;
    // a 1e-12*spot price tolerance only pins the vol where vega is alive
    if (bs_vega(c, sigma) < 1e-4 * c.spot) continue;
    const double recovered = implied_vol(c, price);
    worst = std::max(worst, std::abs(recovered - sigma));
  }
  REQUIRE(worst < 1e-7);
}

TEST_CASE("implied vol rejects prices outside the model-free bounds") {
  ContractSpec c = atm_contract();
  REQUIRE_THROWS_AS(implied_vol(c, -0.5), DomainError);
  REQUIRE_THROWS_AS(implied_vol(c, c.spot * 1.01), DomainError);
  c.strike = 50.0;  // lower bound is S - K = 50
  REQUIRE_THROWS_AS(implied_vol(c, 49.0), DomainError);
}

TEST_CASE("fourier price reduces to black-scholes for deterministic variance") {
  models::HestonParams p;
  p.lambda = 2.0;
  p.theta = 0.09;
  p.nu = 1e-10;
  p.rho = 0.0;
  p.v0 = 0.04;
  ContractSpec c = atm_contract();
  c.maturity = 0.75;

  // time-average of v(t) = theta + (v0 - theta) e^{-lambda t}
  const double tau = c.maturity;
  const double avg_var =
      p.theta + (p.v0 - p.theta) * (1.0 - std::exp(-p.lambda * tau)) / (p.lambda * tau);
  const double bs = bs_price(c, std::sqrt(avg_var));

  auto chf = models::make_batch_chf(models::ModelParams{p}, tau, c.rate, c.div_yield);
  const PriceQuote quote = fourier_price(chf, c);
  REQUIRE(quote.price == Approx(bs).margin(1e-6));
}

TEST_CASE("fourier deep in-the-money call approaches the discounted forward") {
  models::HestonParams p;  // defaults
  ContractSpec c = atm_contract();
  c.strike = 0.05;
  c.rate = 0.01;
  auto chf = models::make_batch_chf(models::ModelParams{p}, c.maturity, c.rate, 0.0);
  const PriceQuote quote = fourier_price(chf, c);
  const double limit = c.spot - c.strike * std::exp(-c.rate * c.maturity);
  REQUIRE(quote.price == Approx(limit).margin(1e-7 * c.spot));
}

TEST_CASE("fourier put-call parity") {
  models::HestonParams p;
  ContractSpec c = atm_contract();
  c.strike = 110.0;
  c.rate = 0.02;
  c.div_yield = 0.01;
  auto chf = models::make_batch_chf(models::ModelParams{p}, c.maturity, c.rate,
                                    c.div_yield);
  c.is_call = true;
  const double call = fourier_price(chf, c).price;
  c.is_call = false;
  const double put = fourier_price(chf, c).price;
  const double fwd_gap = c.spot * std::exp(-c.div_yield * c.maturity) -
                         c.strike * std::exp(-c.rate * c.maturity);
  REQUIRE(call - put == Approx(fwd_gap).margin(1e-6 * c.spot));
}

TEST_CASE("fourier call prices are monotone and convex in strike") {
  models::HestonParams p;
  const double tau = 0.5;
  auto chf = models::make_batch_chf(models::ModelParams{p}, tau, 0.01, 0.0);
  const FourierGrid grid = FourierGrid::build(chf, tau, std::log(1.45));

  std::vector<double> strikes, prices;
  for (double k = 70.0; k <= 140.0; k += 2.5) {
    strikes.push_back(k);
    prices.push_back(grid.call_price(100.0, k, 0.01, 0.0, tau));
  }
  for (std::size_t i = 1; i < prices.size(); ++i)
    REQUIRE(prices[i] <= prices[i - 1] + 1e-9);
  for (std::size_t i = 1; i + 1 < prices.size(); ++i) {
    const double second = prices[i + 1] - 2.0 * prices[i] + prices[i - 1];
    REQUIRE(second >= -1e-8);
  }
}

TEST_CASE("fourier prices respect model-free bounds across models") {
  using namespace spotvol::models;
  const HestonParams diffusion{2.0, 0.04, 0.3, -0.7, 0.04};
  std::vector<ModelParams> all = {
      ModelParams{diffusion},
      ModelParams{BatesParams{diffusion, JumpParams{0.8, -0.05, 0.12, 0.0}}},
      ModelParams{SvcjParams{diffusion, JumpParams{0.8, -0.05, 0.12, 0.08}}},
      ModelParams{RoughHestonParams::make(diffusion, 0.1)},
  };
  for (const auto& m : all) {
    for (double k : {85.0, 100.0, 115.0}) {
      ContractSpec c = atm_contract();
      c.strike = k;
      c.maturity = 0.5;
      c.rate = 0.01;
      c.is_call = k >= 100.0;
      auto chf = make_batch_chf(m, c.maturity, c.rate, c.div_yield);
      const PriceQuote q = fourier_price(chf, c);
      REQUIRE(q.price > c.lower_bound());
      REQUIRE(q.price < c.upper_bound());
      REQUIRE(q.implied_vol > 0.05);
      REQUIRE(q.implied_vol < 1.0);
      REQUIRE(q.vega > 0.0);
    }
  }
}

TEST_CASE("lifted atm implied vols are stable in the factor count") {
  using namespace spotvol::models;
  const HestonParams diffusion{2.0, 0.04, 0.3, -0.7, 0.04};
  const RoughHestonParams rough = RoughHestonParams::make(diffusion, 0.1);
  ContractSpec c = atm_contract();
  c.maturity = 0.25;
  c.rate = 0.0;

  auto iv_for = [&](int n) {
    const ModelParams m{LiftedHestonParams{rough, n, 2.5}};
    auto chf = make_batch_chf(m, c.maturity, 0.0, 0.0);
    return fourier_price(chf, c).implied_vol;
  };
  REQUIRE(std::abs(iv_for(20) - iv_for(50)) < 1e-3);
}
