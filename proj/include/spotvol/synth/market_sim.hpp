#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "spotvol/data/dates.hpp"
#include "spotvol/data/quotes.hpp"
#include "spotvol/data/rv.hpp"
#include "spotvol/errors.hpp"
#include "spotvol/math/rng.hpp"
#include "spotvol/models/chf.hpp"
#include "spotvol/models/simulate.hpp"
#include "spotvol/parallel.hpp"
#include "spotvol/pricing/black_scholes.hpp"
#include "spotvol/pricing/fourier.hpp"
#include "spotvol/surrogate/dataset.hpp"

namespace spotvol::synth {

struct MarketConfig {
  models::ModelParams dgp{models::RoughHestonParams::make(
      models::HestonParams{2.0, 0.04, 0.3, -0.7, 0.04}, 0.1)};
  int n_days = 250;
  int steps_per_day = 78;        // 5-minute bars
  int quotes_per_day = 102;
  double price_noise = 0.01;     // multiplicative, applied to the mid
  double rel_spread = 0.06;      // quoted around the noisy mid
  double rate = 0.01;
  double spot0 = 4000.0;
  double k_min = 0.7, k_max = 1.3;  // strike ladder clipped to this range
  data::Date start_date = 20190102;
  std::uint64_t seed = 1;
  std::vector<int> maturity_days{14, 30, 61, 91, 182, 365};
};

struct Market {
  std::vector<data::Date> dates;        // trading calendar
  std::vector<double> spot;             // close per day
  std::vector<double> true_variance;    // end-of-day latent variance
  std::vector<double> integrated_var;   // per-day integrated variance (annualised)
  data::RVSeries rv;
  std::map<data::Date, std::vector<double>> intraday;  // per-day mid prices
  std::vector<data::DailyPanel> panels; // already through the quote filters
  data::RateCurve rates;
  models::ModelParams dgp{models::HestonParams{}};
};

// Simulates one market path at intraday resolution and manufactures a
// filtered daily options panel along it. Quotes are model prices at the
// day's latent variance (the model re-anchored at v = V_t, matching what the
// two-step estimator prices) plus multiplicative noise; strikes ladder a
// standardised-moneyness grid inside the identifiable wedge.
inline Market simulate_market(const MarketConfig& config) {
  models::validate(config.dgp);
  if (config.n_days < 2) throw DomainError("simulate_market: need >= 2 days");

  Market market;
  market.dgp = config.dgp;
  market.rates.tenors = {0.05, 1.0};
  market.rates.rates = {config.rate, config.rate};

  // one path at intraday resolution
  const double horizon = static_cast<double>(config.n_days) /
                         models::kTradingDaysPerYear;
  const models::PathEnsemble path = models::simulate_paths(
      config.dgp, std::nullopt, horizon, config.steps_per_day, 1, config.seed,
      config.rate, 0.0);
  const std::vector<double>& lp = path.log_price[0];
  const std::vector<double>& var = path.variance[0];

  // trading calendar and per-day intraday series
  std::map<data::Date, std::vector<double>> intraday;
  data::Date date = config.start_date;
  while (!data::is_weekday(date)) date = data::next_weekday(date);
  for (int d = 0; d < config.n_days; ++d) {
    const std::size_t base = static_cast<std::size_t>(d) *
                             static_cast<std::size_t>(config.steps_per_day);
    std::vector<double> prices;
    prices.reserve(static_cast<std::size_t>(config.steps_per_day) + 1);
    for (int k = 0; k <= config.steps_per_day; ++k)
      prices.push_back(config.spot0 * std::exp(lp[base + static_cast<std::size_t>(k)]));
    intraday[date] = std::move(prices);

    market.dates.push_back(date);
    market.spot.push_back(config.spot0 *
                          std::exp(lp[base + static_cast<std::size_t>(config.steps_per_day)]));
    market.true_variance.push_back(
        var[base + static_cast<std::size_t>(config.steps_per_day)]);
    double iv_acc = 0.0;
    for (int k = 0; k < config.steps_per_day; ++k)
      iv_acc += var[base + static_cast<std::size_t>(k)] * path.dt;
    // day-integral of variance scaled back to an annualised rate
    market.integrated_var.push_back(iv_acc * models::kTradingDaysPerYear);
    date = data::next_weekday(date);
  }
  market.rv = data::compute_rv(intraday, true);
  market.intraday = std::move(intraday);

  // panels: per day, model prices at the day's latent variance plus noise
  market.panels.resize(market.dates.size());
  if (config.maturity_days.empty() || config.quotes_per_day <= 0) return market;
  const models::HestonParams& diffusion = models::diffusion_of(config.dgp);
  const int per_maturity = std::max(
      1, config.quotes_per_day / static_cast<int>(config.maturity_days.size()));

  parallel_for(market.dates.size(), [&](std::size_t d) {
    math::Rng rng = math::Rng::substream(config.seed ^ 0xfeedULL, d);
    const double spot = market.spot[d];
    const double v_day =
        std::max(1e-4, market.true_variance[d]);
    const models::ModelParams at_v = models::with_v0(config.dgp, v_day);

    std::vector<data::OptionQuote> raw;
    for (int maturity : config.maturity_days) {
      const double tau = static_cast<double>(maturity) / 365.0;
      const auto chf = models::make_batch_chf(at_v, tau, config.rate, 0.0);
      const surrogate::MoneynessWedge wedge = surrogate::moneyness_wedge(
          v_day, diffusion.theta, diffusion.rho, tau);
      pricing::FourierGrid grid;
      try {
        grid = pricing::FourierGrid::build(
            chf, tau, std::max(std::abs(wedge.log_lo), std::abs(wedge.log_hi)));
      } catch (const std::exception&) {
        continue;  // maturity skipped for this day
      }
      for (int j = 0; j < per_maturity; ++j) {
        const double frac =
            (j + 0.5) / static_cast<double>(per_maturity);
        const double logk = std::clamp(
            0.92 * (wedge.log_lo + frac * (wedge.log_hi - wedge.log_lo)),
            std::log(config.k_min), std::log(config.k_max));
        const double k = std::exp(logk);
        const bool is_call = k >= 1.0;
        try {
          double price = grid.call_price(1.0, k, config.rate, 0.0, tau);
          pricing::ContractSpec c;
          c.spot = 1.0;
          c.strike = k;
          c.maturity = tau;
          c.rate = config.rate;
          c.is_call = true;
          if (!is_call)
            price += k * std::exp(-config.rate * tau) - 1.0;
          c.is_call = is_call;
          const double noisy =
              price * std::exp(config.price_noise * rng.gaussian() -
                               0.5 * config.price_noise * config.price_noise);
          if (!(noisy > c.lower_bound() + 1e-10) || !(noisy < c.upper_bound() - 1e-10))
            continue;
          const double iv = pricing::implied_vol(c, noisy);
          if (pricing::bs_vega(c, iv) < 1e-7) continue;

          data::OptionQuote q;
          q.date = market.dates[d];
          q.expiry = data::add_days(market.dates[d], maturity);
          q.strike = k * spot;
          q.is_call = is_call;
          q.bid = noisy * spot * (1.0 - 0.5 * config.rel_spread);
          q.ask = noisy * spot * (1.0 + 0.5 * config.rel_spread);
          q.open_interest = 100.0;
          q.volume = 50.0;
          q.quoted_iv = iv;
          q.quoted_vega = pricing::bs_vega(c, iv) * spot;
          raw.push_back(q);
        } catch (const std::exception&) {
          // unpriceable wing point; skip
        }
      }
    }
    market.panels[d] = data::filter_panel(market.dates[d], raw, spot,
                                          market.rates, data::FilterConfig{});
  });
  return market;
}

}  // namespace spotvol::synth
