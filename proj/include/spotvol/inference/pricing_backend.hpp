#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "spotvol/data/quotes.hpp"
#include "spotvol/data/rv.hpp"
#include "spotvol/errors.hpp"
#include "spotvol/models/chf.hpp"
#include "spotvol/pricing/black_scholes.hpp"
#include "spotvol/pricing/fourier.hpp"
#include "spotvol/surrogate/surrogate.hpp"

namespace spotvol::inference {

// One estimation day, normalised to unit spot. Quotes are sorted by
// maturity and grouped so a pricing engine can share per-maturity work.
struct DayQuotes {
  data::Date date = 0;
  double spot = 0.0;
  std::vector<double> moneyness;   // K / S
  std::vector<double> tau;
  std::vector<double> rate;
  std::vector<bool> is_call;
  std::vector<double> market;      // mid / S
  std::vector<double> vega;        // quoted vega / S
  double anchor_var = 0.0;         // annualised realized variance, pre-log
  bool has_anchor = false;

  struct Group {
    std::size_t begin = 0, end = 0;  // index range sharing (tau, rate)
  };
  std::vector<Group> groups;

  std::size_t size() const { return moneyness.size(); }
};

inline DayQuotes make_day_quotes(const data::DailyPanel& panel,
                                 const data::RVSeries& rv) {
  DayQuotes day;
  day.date = panel.date;
  day.spot = panel.spot;

  std::vector<std::size_t> order(panel.quotes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return panel.quotes[a].tau < panel.quotes[b].tau;
  });
  for (std::size_t idx : order) {
    const data::PanelQuote& q = panel.quotes[idx];
    day.moneyness.push_back(q.moneyness);
    day.tau.push_back(q.tau);
    day.rate.push_back(q.rate);
    day.is_call.push_back(q.raw.is_call);
    day.market.push_back(q.mid / panel.spot);
    day.vega.push_back(q.vega / panel.spot);
  }
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= day.size(); ++i) {
    if (i == day.size() || day.tau[i] != day.tau[begin]) {
      day.groups.push_back({begin, i});
      begin = i;
    }
  }
  const long idx = rv.index_of(panel.date);
  if (idx >= 0) {
    day.anchor_var = rv.anchor_var[static_cast<std::size_t>(idx)];
    day.has_anchor = true;
  }
  return day;
}

// Prices a day of quotes under structural parameters theta with the day's
// latent variance v. Implementations must be safe to call concurrently.
class PricingBackend {
public:
  virtual ~PricingBackend() = default;
  virtual std::string name() const = 0;
  virtual void price_day(const models::ModelParams& theta, double v,
                         const DayQuotes& day, std::vector<double>& out) const = 0;
};

// Fourier quadrature through the model characteristic function; one grid per
// maturity group, all strikes priced off it.
class QuadratureBackend : public PricingBackend {
public:
  std::string name() const override { return "quadrature"; }

  void price_day(const models::ModelParams& theta, double v, const DayQuotes& day,
                 std::vector<double>& out) const override {
    const models::ModelParams at_v = models::with_v0(theta, v);
    out.resize(day.size());
    for (const DayQuotes::Group& g : day.groups) {
      const double tau = day.tau[g.begin];
      const double rate = day.rate[g.begin];
      double max_logk = 0.0;
      for (std::size_t i = g.begin; i < g.end; ++i)
        max_logk = std::max(max_logk, std::abs(std::log(day.moneyness[i])));
      const auto chf = models::make_batch_chf(at_v, tau, rate, 0.0);
      const pricing::FourierGrid grid =
          pricing::FourierGrid::build(chf, tau, max_logk);
      const double df = std::exp(-rate * tau);
      for (std::size_t i = g.begin; i < g.end; ++i) {
        double price = grid.call_price(1.0, day.moneyness[i], rate, 0.0, tau);
        if (!day.is_call[i]) price += day.moneyness[i] * df - 1.0;
        out[i] = price;
      }
    }
  }
};

// Trained lifted-Heston surrogate; rough Heston only. Implied vols come from
// one batched forward pass, prices via Black-Scholes at the quote's rate.
class SurrogateBackend : public PricingBackend {
public:
  explicit SurrogateBackend(std::shared_ptr<const surrogate::PricingSurrogate> model)
      : model_(std::move(model)) {
    if (!model_) throw ConfigError("surrogate backend: null model");
  }

  std::string name() const override { return "surrogate"; }

  const surrogate::TrainingBox& box() const { return model_->box(); }

  void price_day(const models::ModelParams& theta, double v, const DayQuotes& day,
                 std::vector<double>& out) const override {
    const auto* rough = std::get_if<models::RoughHestonParams>(&theta);
    if (!rough)
      throw ConfigError("surrogate backend supports rough_heston only, got " +
                        models::model_label(theta));
    std::vector<std::array<double, surrogate::kInputDim>> inputs(day.size());
    for (std::size_t i = 0; i < day.size(); ++i) {
      // surrogate prices at zero rates: pass forward moneyness
      const double k_fwd = day.moneyness[i] * std::exp(-day.rate[i] * day.tau[i]);
      inputs[i] = {rough->base.lambda, rough->base.theta, rough->base.nu,
                   rough->base.rho,   v,                 rough->hurst,
                   k_fwd,             day.tau[i]};
    }
    const auto predictions = model_->predict_batch(inputs);
    out.resize(day.size());
    for (std::size_t i = 0; i < day.size(); ++i) {
      pricing::ContractSpec c;
      c.spot = 1.0;
      c.strike = day.moneyness[i];
      c.maturity = day.tau[i];
      c.rate = day.rate[i];
      c.is_call = day.is_call[i];
      out[i] = pricing::bs_price(c, predictions[i].iv);
    }
  }

private:
  std::shared_ptr<const surrogate::PricingSurrogate> model_;
};

}  // namespace spotvol::inference
