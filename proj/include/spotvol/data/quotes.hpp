#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotvol/data/dates.hpp"
#include "spotvol/data/rates.hpp"
#include "spotvol/errors.hpp"

namespace spotvol::data {

struct OptionQuote {
  Date date = 0;
  Date expiry = 0;
  double strike = 0.0;
  bool is_call = true;
  double bid = 0.0;
  double ask = 0.0;
  double open_interest = 0.0;
  double volume = 0.0;
  double quoted_iv = 0.0;
  double quoted_vega = 0.0;

  double mid() const { return 0.5 * (bid + ask); }
};

struct PanelQuote {
  OptionQuote raw;
  double moneyness = 0.0;   // K / S
  double tau = 0.0;         // calendar year fraction
  double mid = 0.0;
  double vega = 0.0;
  double iv = 0.0;
  double rate = 0.0;        // interpolated to the quote's maturity
};

struct DailyPanel {
  Date date = 0;
  double spot = 0.0;
  std::vector<PanelQuote> quotes;

  bool usable() const { return !quotes.empty(); }
};

struct FilterConfig {
  long min_maturity_days = 7;
  long max_maturity_days = 365;
  double min_mid = 0.375;       // currency floor on the bid-ask midpoint
  double max_rel_spread = 0.3;  // (ask - bid) / mid
};

// Per-rule drop counts; a quote is charged to the first rule it trips, in
// the order the filters run.
struct FilterReport {
  std::size_t input = 0;
  std::size_t maturity_window = 0;
  std::size_t zero_fields = 0;       // null/zero OI, volume, IV or vega
  std::size_t small_mid = 0;
  std::size_t wide_spread = 0;
  std::size_t lower_bound = 0;
  std::size_t itm = 0;
  std::size_t kept = 0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"input", input},
                          {"maturity_window", maturity_window},
                          {"zero_fields", zero_fields},
                          {"small_mid", small_mid},
                          {"wide_spread", wide_spread},
                          {"lower_bound", lower_bound},
                          {"itm", itm},
                          {"kept", kept}};
  }
};

// Liquidity and sanity filters applied to one day of raw quotes:
//  1. maturity between one week and one year,
//  2. no null/zero open interest, volume, implied vol or vega,
//  3. midpoint above the currency floor,
//  4. relative bid-ask spread at most 0.3,
//  5. intrinsic lower bound: call mid >= max(0, S-K), put mid >= max(0, K-S),
//  6. out-of-the-money only: calls keep K >= S, puts keep K < S.
// Survivors carry moneyness, maturity, midpoint, vega and interpolated rate.
inline DailyPanel filter_panel(Date date, const std::vector<OptionQuote>& raw,
                               double spot, const RateCurve& rates,
                               const FilterConfig& config, FilterReport* report = nullptr) {
  if (!(spot > 0.0)) throw DataError("filter_panel: spot must be > 0");
  FilterReport local;
  local.input = raw.size();

  DailyPanel panel;
  panel.date = date;
  panel.spot = spot;
  for (const OptionQuote& q : raw) {
    const long days = days_between(date, q.expiry);
    if (days < config.min_maturity_days || days > config.max_maturity_days) {
      ++local.maturity_window;
      continue;
    }
    if (!(q.open_interest > 0.0) || !(q.volume > 0.0) || !(q.quoted_iv > 0.0) ||
        !(q.quoted_vega > 0.0)) {
      ++local.zero_fields;
      continue;
    }
    const double mid = q.mid();
    if (!(mid >= config.min_mid)) {
      ++local.small_mid;
      continue;
    }
    if ((q.ask - q.bid) / mid > config.max_rel_spread) {
      ++local.wide_spread;
      continue;
    }
    const double intrinsic = q.is_call ? std::max(0.0, spot - q.strike)
                                       : std::max(0.0, q.strike - spot);
    if (mid < intrinsic) {
      ++local.lower_bound;
      continue;
    }
    const bool otm = q.is_call ? q.strike >= spot : q.strike < spot;
    if (!otm) {
      ++local.itm;
      continue;
    }

    PanelQuote pq;
    pq.raw = q;
    pq.moneyness = q.strike / spot;
    pq.tau = static_cast<double>(days) / 365.0;
    pq.mid = mid;
    pq.vega = q.quoted_vega;
    pq.iv = q.quoted_iv;
    pq.rate = interp_rate(rates, pq.tau);
    panel.quotes.push_back(pq);
  }
  local.kept = panel.quotes.size();
  if (report) *report = local;
  return panel;
}

}  // namespace spotvol::data
