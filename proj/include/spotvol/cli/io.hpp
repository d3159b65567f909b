#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotvol/data/csv.hpp"
#include "spotvol/data/dates.hpp"
#include "spotvol/data/quotes.hpp"
#include "spotvol/data/rates.hpp"
#include "spotvol/data/rv.hpp"
#include "spotvol/data/summary.hpp"
#include "spotvol/errors.hpp"
#include "spotvol/synth/market_sim.hpp"

namespace spotvol::cli {

inline std::string fmt(double v, int digits = 12) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

inline void require_file(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw DataError("missing input file: " + path);
}

inline nlohmann::json read_json_file(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed json in " + path + ": " + e.what());
  }
  return j;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(1) << "\n";
}

// ---- vendor-style inputs -------------------------------------------------
// Schemas documented in docs/file_formats.md.

inline std::map<data::Date, std::vector<data::OptionQuote>> load_quotes_csv(
    const std::string& path) {
  require_file(path);
  const data::CsvTable t = data::read_csv(path);
  const std::size_t c_date = t.column("date"), c_expiry = t.column("expiry"),
                    c_strike = t.column("strike"), c_call = t.column("is_call"),
                    c_bid = t.column("bid"), c_ask = t.column("ask"),
                    c_oi = t.column("open_interest"), c_vol = t.column("volume"),
                    c_iv = t.column("implied_vol"), c_vega = t.column("vega");
  std::map<data::Date, std::vector<data::OptionQuote>> by_date;
  for (const auto& row : t.rows) {
    data::OptionQuote q;
    q.date = static_cast<data::Date>(data::parse_long(row[c_date], "quotes.date"));
    q.expiry = static_cast<data::Date>(data::parse_long(row[c_expiry], "quotes.expiry"));
    q.strike = data::parse_double(row[c_strike], "quotes.strike");
    q.is_call = data::parse_long(row[c_call], "quotes.is_call") != 0;
    q.bid = data::parse_double(row[c_bid], "quotes.bid");
    q.ask = data::parse_double(row[c_ask], "quotes.ask");
    q.open_interest = data::parse_double(row[c_oi], "quotes.open_interest");
    q.volume = data::parse_double(row[c_vol], "quotes.volume");
    q.quoted_iv = data::parse_double(row[c_iv], "quotes.implied_vol");
    q.quoted_vega = data::parse_double(row[c_vega], "quotes.vega");
    by_date[q.date].push_back(q);
  }
  return by_date;
}

inline std::map<data::Date, double> load_daily_series_csv(const std::string& path,
                                                          const std::string& column) {
  require_file(path);
  const data::CsvTable t = data::read_csv(path);
  const std::size_t c_date = t.column("date"), c_val = t.column(column);
  std::map<data::Date, double> out;
  for (const auto& row : t.rows)
    out[static_cast<data::Date>(data::parse_long(row[c_date], "date"))] =
        data::parse_double(row[c_val], column);
  return out;
}

inline std::map<data::Date, std::vector<double>> load_intraday_csv(
    const std::string& path) {
  require_file(path);
  const data::CsvTable t = data::read_csv(path);
  const std::size_t c_date = t.column("date"), c_seq = t.column("seq"),
                    c_price = t.column("price");
  std::map<data::Date, std::vector<std::pair<long, double>>> staged;
  for (const auto& row : t.rows)
    staged[static_cast<data::Date>(data::parse_long(row[c_date], "intraday.date"))]
        .emplace_back(data::parse_long(row[c_seq], "intraday.seq"),
                      data::parse_double(row[c_price], "intraday.price"));
  std::map<data::Date, std::vector<double>> out;
  for (auto& [date, rows] : staged) {
    std::sort(rows.begin(), rows.end());
    std::vector<double> prices;
    prices.reserve(rows.size());
    for (const auto& [seq, price] : rows) prices.push_back(price);
    out[date] = std::move(prices);
  }
  return out;
}

// Per-date curves when a date column is present, otherwise one static curve.
inline std::map<data::Date, data::RateCurve> load_rates_csv(const std::string& path) {
  require_file(path);
  const data::CsvTable t = data::read_csv(path);
  const std::size_t c_tenor = t.column("tenor_days"), c_rate = t.column("rate");
  std::map<data::Date, data::RateCurve> out;
  if (t.has_column("date")) {
    const std::size_t c_date = t.column("date");
    std::map<data::Date, std::vector<std::pair<double, double>>> staged;
    for (const auto& row : t.rows)
      staged[static_cast<data::Date>(data::parse_long(row[c_date], "rates.date"))]
          .emplace_back(data::parse_double(row[c_tenor], "rates.tenor_days") / 365.0,
                        data::parse_double(row[c_rate], "rates.rate"));
    for (auto& [date, knots] : staged) {
      std::sort(knots.begin(), knots.end());
      data::RateCurve curve;
      for (const auto& [tenor, rate] : knots) {
        curve.tenors.push_back(tenor);
        curve.rates.push_back(rate);
      }
      curve.validate();
      out[date] = std::move(curve);
    }
  } else {
    std::vector<std::pair<double, double>> knots;
    for (const auto& row : t.rows)
      knots.emplace_back(data::parse_double(row[c_tenor], "rates.tenor_days") / 365.0,
                         data::parse_double(row[c_rate], "rates.rate"));
    std::sort(knots.begin(), knots.end());
    data::RateCurve curve;
    for (const auto& [tenor, rate] : knots) {
      curve.tenors.push_back(tenor);
      curve.rates.push_back(rate);
    }
    curve.validate();
    out[0] = std::move(curve);  // date 0: applies to every day
  }
  return out;
}

inline const data::RateCurve& curve_for(const std::map<data::Date, data::RateCurve>& curves,
                                        data::Date date) {
  auto it = curves.find(date);
  if (it != curves.end()) return it->second;
  it = curves.find(0);
  if (it != curves.end()) return it->second;
  throw DataError("no rate curve for date " + std::to_string(date));
}

// ---- intermediate artifacts ----------------------------------------------

inline void write_panels_csv(const std::string& path,
                             const std::vector<data::DailyPanel>& panels) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& panel : panels)
    for (const auto& q : panel.quotes)
      rows.push_back({std::to_string(panel.date), fmt(panel.spot),
                      fmt(q.moneyness), fmt(q.tau), fmt(q.mid), fmt(q.vega),
                      fmt(q.iv), fmt(q.rate), q.raw.is_call ? "1" : "0"});
  data::write_csv(path,
                  {"date", "spot", "moneyness", "tau", "mid", "vega", "iv", "rate",
                   "is_call"},
                  rows);
}

inline std::vector<data::DailyPanel> read_panels_csv(const std::string& path) {
  require_file(path);
  const data::CsvTable t = data::read_csv(path);
  const std::size_t c_date = t.column("date"), c_spot = t.column("spot"),
                    c_k = t.column("moneyness"), c_tau = t.column("tau"),
                    c_mid = t.column("mid"), c_vega = t.column("vega"),
                    c_iv = t.column("iv"), c_rate = t.column("rate"),
                    c_call = t.column("is_call");
  std::map<data::Date, data::DailyPanel> panels;
  for (const auto& row : t.rows) {
    const data::Date date =
        static_cast<data::Date>(data::parse_long(row[c_date], "panels.date"));
    data::DailyPanel& panel = panels[date];
    panel.date = date;
    panel.spot = data::parse_double(row[c_spot], "panels.spot");
    data::PanelQuote q;
    q.moneyness = data::parse_double(row[c_k], "panels.moneyness");
    q.tau = data::parse_double(row[c_tau], "panels.tau");
    q.mid = data::parse_double(row[c_mid], "panels.mid");
    q.vega = data::parse_double(row[c_vega], "panels.vega");
    q.iv = data::parse_double(row[c_iv], "panels.iv");
    q.rate = data::parse_double(row[c_rate], "panels.rate");
    q.raw.is_call = data::parse_long(row[c_call], "panels.is_call") != 0;
    q.raw.date = date;
    q.raw.strike = q.moneyness * panel.spot;
    panel.quotes.push_back(q);
  }
  std::vector<data::DailyPanel> out;
  out.reserve(panels.size());
  for (auto& [date, panel] : panels) out.push_back(std::move(panel));
  return out;
}

inline void write_rv_csv(const std::string& path, const data::RVSeries& rv) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < rv.size(); ++i)
    rows.push_back({std::to_string(rv.dates[i]), fmt(rv.log_rv[i]),
                    fmt(rv.anchor_var[i]), fmt(rv.rv1[i]), fmt(rv.rv5[i]),
                    fmt(rv.rv22[i])});
  data::write_csv(path, {"date", "log_rv", "anchor_var", "rv1", "rv5", "rv22"}, rows);
}

inline data::RVSeries read_rv_csv(const std::string& path) {
  require_file(path);
  const data::CsvTable t = data::read_csv(path);
  const std::size_t c_date = t.column("date"), c_log = t.column("log_rv"),
                    c_anchor = t.column("anchor_var"), c1 = t.column("rv1"),
                    c5 = t.column("rv5"), c22 = t.column("rv22");
  data::RVSeries rv;
  for (const auto& row : t.rows) {
    rv.dates.push_back(static_cast<data::Date>(data::parse_long(row[c_date], "rv.date")));
    rv.log_rv.push_back(data::parse_double(row[c_log], "rv.log_rv"));
    rv.anchor_var.push_back(data::parse_double(row[c_anchor], "rv.anchor_var"));
    rv.rv1.push_back(data::parse_double(row[c1], "rv.rv1"));
    rv.rv5.push_back(data::parse_double(row[c5], "rv.rv5"));
    rv.rv22.push_back(data::parse_double(row[c22], "rv.rv22"));
  }
  return rv;
}

// Synthetic-market export in the vendor input schemas, so the synthetic
// study exercises the same ingestion path as real data.
inline void export_market_csvs(const synth::Market& market, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::vector<std::vector<std::string>> qrows;
  for (const auto& panel : market.panels)
    for (const auto& q : panel.quotes)
      qrows.push_back({std::to_string(q.raw.date), std::to_string(q.raw.expiry),
                       fmt(q.raw.strike), q.raw.is_call ? "1" : "0", fmt(q.raw.bid),
                       fmt(q.raw.ask), fmt(q.raw.open_interest), fmt(q.raw.volume),
                       fmt(q.raw.quoted_iv), fmt(q.raw.quoted_vega)});
  data::write_csv(dir + "/quotes.csv",
                  {"date", "expiry", "strike", "is_call", "bid", "ask",
                   "open_interest", "volume", "implied_vol", "vega"},
                  qrows);

  std::vector<std::vector<std::string>> urows;
  for (std::size_t i = 0; i < market.dates.size(); ++i)
    urows.push_back({std::to_string(market.dates[i]), fmt(market.spot[i])});
  data::write_csv(dir + "/underlying.csv", {"date", "spot"}, urows);

  std::vector<std::vector<std::string>> irows;
  for (const auto& [date, prices] : market.intraday)
    for (std::size_t k = 0; k < prices.size(); ++k)
      irows.push_back({std::to_string(date), std::to_string(k), fmt(prices[k])});
  data::write_csv(dir + "/intraday.csv", {"date", "seq", "price"}, irows);

  std::vector<std::vector<std::string>> rrows;
  for (std::size_t i = 0; i < market.rates.tenors.size(); ++i)
    rrows.push_back({fmt(market.rates.tenors[i] * 365.0), fmt(market.rates.rates[i])});
  data::write_csv(dir + "/rates.csv", {"tenor_days", "rate"}, rrows);
}

}  // namespace spotvol::cli
