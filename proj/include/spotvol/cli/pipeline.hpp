#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spotvol/cli/io.hpp"
#include "spotvol/cli/report.hpp"
#include "spotvol/cli/run_config.hpp"
#include "spotvol/forecast/evaluate.hpp"
#include "spotvol/forecast/har.hpp"
#include "spotvol/inference/walk_forward.hpp"
#include "spotvol/surrogate/heatmap.hpp"
#include "spotvol/surrogate/surrogate.hpp"
#include "spotvol/synth/market_sim.hpp"

namespace spotvol::cli {

namespace fs = std::filesystem;

// ---- stage manifest --------------------------------------------------------

inline std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing input file: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[65536];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

// Appends one stage record (input content hashes, output names) to the run
// manifest so every artifact's provenance is machine-checkable.
inline void record_stage(const std::string& outdir, const std::string& stage,
                         const std::vector<std::string>& inputs,
                         const std::vector<std::string>& outputs) {
  const std::string path = outdir + "/manifest.json";
  nlohmann::json manifest = nlohmann::json::object();
  if (fs::exists(path)) manifest = read_json_file(path);
  nlohmann::json entry;
  for (const auto& in : inputs) {
    // keys relative to the run directory keep reruns byte-comparable
    const auto rel = fs::path(in).lexically_relative(outdir);
    const std::string key =
        (!rel.empty() && rel.native().rfind("..", 0) != 0) ? rel.string() : in;
    entry["inputs"][key] = std::to_string(fnv1a_file(in));
  }
  entry["outputs"] = outputs;
  manifest[stage] = entry;
  write_json_file(path, manifest);
}

// ---- model wiring -----------------------------------------------------------

inline models::ModelParams default_theta(const std::string& model) {
  const models::HestonParams base{2.0, 0.04, 0.3, -0.7, 0.04};
  if (model == "heston") return base;
  if (model == "bates")
    return models::BatesParams{base, models::JumpParams{0.5, -0.05, 0.1, 0.0}};
  if (model == "svcj")
    return models::SvcjParams{base, models::JumpParams{0.5, -0.05, 0.1, 0.05}};
  if (model == "rough_heston") return models::RoughHestonParams::make(base, 0.1);
  throw ConfigError("unknown model \"" + model + "\"");
}

inline std::string har_tag(const std::string& model) {
  if (model == "heston") return "HAR-RV-Heston";
  if (model == "bates") return "HAR-RV-Bates";
  if (model == "svcj") return "HAR-RV-SVCJ";
  if (model == "rough_heston") return "HAR-RV-RHeston";
  throw ConfigError("unknown model \"" + model + "\"");
}

// ---- stages ----------------------------------------------------------------

// Reads the vendor CSVs, applies the panel filters day by day and writes the
// canonical intermediates (panels.csv, rv.csv) plus filter diagnostics.
inline void stage_ingest(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const auto quotes = load_quotes_csv(cfg.inputs.quotes);
  const auto spots = load_daily_series_csv(cfg.inputs.underlying, "spot");
  const auto intraday = load_intraday_csv(cfg.inputs.intraday);
  const auto curves = load_rates_csv(cfg.inputs.rates);

  const data::RVSeries rv = data::compute_rv(intraday, true);

  std::vector<data::DailyPanel> panels;
  nlohmann::json drop_report = nlohmann::json::object();
  data::FilterReport totals;
  for (const auto& [date, raw] : quotes) {
    const auto spot_it = spots.find(date);
    if (spot_it == spots.end())
      throw DataError("no underlying close for quote date " + std::to_string(date));
    data::FilterReport report;
    data::DailyPanel panel = data::filter_panel(date, raw, spot_it->second,
                                                curve_for(curves, date),
                                                cfg.filters, &report);
    totals.input += report.input;
    totals.maturity_window += report.maturity_window;
    totals.zero_fields += report.zero_fields;
    totals.small_mid += report.small_mid;
    totals.wide_spread += report.wide_spread;
    totals.lower_bound += report.lower_bound;
    totals.itm += report.itm;
    totals.kept += report.kept;
    if (panel.usable()) panels.push_back(std::move(panel));
  }
  drop_report["totals"] = totals.to_json();
  drop_report["days"] = panels.size();
  drop_report["rv_warnings"] = rv.warnings;

  write_panels_csv(cfg.output_dir + "/panels.csv", panels);
  write_rv_csv(cfg.output_dir + "/rv.csv", rv);
  write_json_file(cfg.output_dir + "/filter_report.json", drop_report);
  write_json_file(cfg.output_dir + "/panel_summary.json",
                  data::panel_summary(panels).to_json());
  record_stage(cfg.output_dir, "ingest",
               {cfg.inputs.quotes, cfg.inputs.underlying, cfg.inputs.intraday,
                cfg.inputs.rates},
               {"panels.csv", "rv.csv", "filter_report.json", "panel_summary.json"});
}

// Trains (or loads, when the weight file already matches the configured box)
// the lifted-Heston pricing surrogate and writes its accuracy heatmap.
inline std::shared_ptr<const surrogate::PricingSurrogate> stage_train_surrogate(
    const RunConfig& cfg, bool* cache_hit = nullptr) {
  fs::create_directories(cfg.output_dir);
  const std::string path = cfg.surrogate_cfg.path;
  if (fs::exists(path)) {
    try {
      auto model = std::make_shared<surrogate::PricingSurrogate>(
          surrogate::PricingSurrogate::load(path, cfg.surrogate_cfg.box));
      if (cache_hit) *cache_hit = true;
      return model;
    } catch (const DataError&) {
      // stale or mismatched weights: retrain below
    }
  }
  if (cache_hit) *cache_hit = false;

  const surrogate::DatasetResult data = surrogate::generate_dataset(
      cfg.surrogate_cfg.box, cfg.surrogate_cfg.samples, cfg.seed,
      cfg.surrogate_cfg.strikes_per_surface);
  auto model = std::make_shared<surrogate::PricingSurrogate>(
      surrogate::PricingSurrogate::fit(data.samples, cfg.surrogate_cfg.box,
                                       cfg.surrogate_cfg.train, cfg.seed));
  model->save(path);

  nlohmann::json meta;
  meta["samples"] = data.samples.size();
  meta["dropped"] = data.dropped;
  meta["rejected"] = data.rejected;
  meta["best_val_loss"] = model->report().best_val_loss;
  meta["epochs_run"] = model->report().epochs_run;
  write_json_file(cfg.output_dir + "/surrogate_training.json", meta);
  record_stage(cfg.output_dir, "train-surrogate", {},
               {path, "surrogate_training.json"});
  return model;
}

inline std::unique_ptr<inference::PricingBackend> make_backend(
    const RunConfig& cfg, const std::string& model,
    std::shared_ptr<const surrogate::PricingSurrogate> surrogate_model) {
  if (model == "rough_heston" && cfg.rough_backend == "surrogate") {
    if (!surrogate_model)
      throw ConfigError("rough_heston with surrogate backend needs a trained model");
    return std::make_unique<inference::SurrogateBackend>(std::move(surrogate_model));
  }
  return std::make_unique<inference::QuadratureBackend>();
}

// Walk-forward spot-variance inference for one model; emits the spot path,
// annual parameters, provenance log and per-year diagnostics.
inline void stage_infer(const RunConfig& cfg, const std::string& model,
                        std::shared_ptr<const surrogate::PricingSurrogate>
                            surrogate_model) {
  const std::string panels_path = cfg.output_dir + "/panels.csv";
  const std::string rv_path = cfg.output_dir + "/rv.csv";
  const std::vector<data::DailyPanel> panels = read_panels_csv(panels_path);
  const data::RVSeries rv = read_rv_csv(rv_path);

  std::vector<inference::DayQuotes> days;
  for (const auto& panel : panels) {
    inference::DayQuotes day = inference::make_day_quotes(panel, rv);
    if (day.size() > 0 && day.has_anchor) days.push_back(std::move(day));
  }

  const bool use_surrogate = model == "rough_heston" && cfg.rough_backend == "surrogate";
  const auto backend = make_backend(cfg, model, surrogate_model);
  const std::optional<surrogate::TrainingBox> box =
      use_surrogate ? std::optional<surrogate::TrainingBox>(surrogate_model->box())
                    : std::nullopt;

  inference::InferenceConfig inf_cfg = cfg.inference;
  inf_cfg.backend = use_surrogate ? "surrogate" : "quadrature";
  const inference::WalkForwardResult wf = inference::walk_forward(
      *backend, days, default_theta(model), inf_cfg, box);

  const auto violations = inference::audit_no_lookahead(wf.provenance);
  if (!violations.empty())
    throw NumericError("walk_forward produced look-ahead: " + violations.front());

  nlohmann::json out;
  out["model"] = model;
  out["backend"] = inf_cfg.backend;
  out["path"] = wf.path.to_json();
  for (const auto& [year, theta] : wf.theta_by_year)
    out["theta_by_year"][std::to_string(year)] = models::to_json(theta);
  for (const auto& entry : wf.provenance) out["provenance"].push_back(entry.to_json());
  out["gap_years"] = wf.gap_years;
  for (const auto& [year, diag] : wf.diagnostics_by_year)
    out["diagnostics"][std::to_string(year)] = diag.to_json();
  const std::string out_name = "spot_" + model + ".json";
  write_json_file(cfg.output_dir + "/" + out_name, out);
  record_stage(cfg.output_dir, "infer-" + model, {panels_path, rv_path}, {out_name});
}

// ---- HAR fitting and evaluation --------------------------------------------

struct HarInputs {
  data::RVSeries rv;
  // exogenous daily series per HAR tag (log spot vol or VIX level)
  std::map<std::string, forecast::DailySeries> exogenous;
  std::set<data::Date> common_origins;  // dates usable by every specification
};

inline HarInputs load_har_inputs(const RunConfig& cfg) {
  HarInputs inputs;
  inputs.rv = read_rv_csv(cfg.output_dir + "/rv.csv");

  for (const auto& model : cfg.models) {
    const std::string path = cfg.output_dir + "/spot_" + model + ".json";
    const nlohmann::json j = read_json_file(path);
    forecast::DailySeries series;
    const auto& dates = j.at("path").at("dates");
    const auto& v_hat = j.at("path").at("v_hat");
    const auto& usable = j.at("path").at("usable");
    for (std::size_t i = 0; i < dates.size(); ++i) {
      if (usable[i].get<int>() == 0) continue;
      const double v = v_hat[i].get<double>();
      if (!(v > 0.0)) continue;
      // spot volatility enters in logs: log sqrt(V)
      series[dates[i].get<data::Date>()] = 0.5 * std::log(v);
    }
    inputs.exogenous[har_tag(model)] = std::move(series);
  }
  if (!cfg.inputs.vix.empty()) {
    forecast::DailySeries vix;
    for (const auto& [date, value] : load_daily_series_csv(cfg.inputs.vix, "vix"))
      vix[date] = value;
    inputs.exogenous["HAR-RV-VIX"] = std::move(vix);
  }

  // identical samples across specifications: origins present in every series
  for (std::size_t i = 0; i < inputs.rv.size(); ++i) {
    const data::Date d = inputs.rv.dates[i];
    bool everywhere = true;
    for (const auto& [tag, series] : inputs.exogenous)
      if (!series.count(d)) everywhere = false;
    if (everywhere) inputs.common_origins.insert(d);
  }
  return inputs;
}

inline std::vector<std::string> har_model_tags(const RunConfig& cfg) {
  std::vector<std::string> tags{"HAR-RV"};
  if (!cfg.inputs.vix.empty()) tags.push_back("HAR-RV-VIX");
  for (const auto& model : cfg.models) tags.push_back(har_tag(model));
  return tags;
}

inline forecast::HarDesign design_for(const HarInputs& inputs, const std::string& tag,
                                      int horizon) {
  std::optional<forecast::DailySeries> exo;
  std::string exo_col;
  if (tag != "HAR-RV") {
    exo = inputs.exogenous.at(tag);
    exo_col = tag == "HAR-RV-VIX" ? "vix" : "log_spot_vol";
  }
  return forecast::build_har_design(inputs.rv, horizon, tag, exo, exo_col,
                                    &inputs.common_origins);
}

// In-sample fits for every specification and horizon; coefficients persist
// to fits.json, the one-day table mirrors the usual layout.
inline void stage_fit(const RunConfig& cfg) {
  if (cfg.split.in_sample_end == 0)
    throw ConfigError("fit stage needs split.in_sample_end");
  const HarInputs inputs = load_har_inputs(cfg);

  nlohmann::json fits_json;
  std::vector<forecast::HarFit> one_day_fits;
  for (const std::string& tag : har_model_tags(cfg)) {
    for (int h = 1; h <= cfg.har.max_horizon; ++h) {
      forecast::HarDesign design = design_for(inputs, tag, h);
      // in-sample rows: the whole target window inside the estimation period
      std::vector<Eigen::Index> keep;
      for (Eigen::Index r = 0; r < design.x.rows(); ++r) {
        const long i = inputs.rv.index_of(design.origin_dates[static_cast<std::size_t>(r)]);
        const data::Date target_end =
            inputs.rv.dates[static_cast<std::size_t>(i) + static_cast<std::size_t>(h)];
        if (target_end <= cfg.split.in_sample_end) keep.push_back(r);
      }
      if (keep.size() < static_cast<std::size_t>(design.x.cols()) + 2)
        throw DataError("fit: not enough in-sample rows for " + tag + " at horizon " +
                        std::to_string(h));
      forecast::HarDesign in_sample = design;
      in_sample.x.resize(static_cast<Eigen::Index>(keep.size()), design.x.cols());
      in_sample.y.resize(static_cast<Eigen::Index>(keep.size()));
      in_sample.origin_dates.clear();
      for (std::size_t r = 0; r < keep.size(); ++r) {
        in_sample.x.row(static_cast<Eigen::Index>(r)) = design.x.row(keep[r]);
        in_sample.y(static_cast<Eigen::Index>(r)) = design.y(keep[r]);
        in_sample.origin_dates.push_back(
            design.origin_dates[static_cast<std::size_t>(keep[r])]);
      }
      const forecast::HarFit fit = forecast::fit_har(in_sample, cfg.har.nw_lags);
      if (h == 1) one_day_fits.push_back(fit);

      nlohmann::json f;
      f["columns"] = fit.columns;
      f["coef"] = std::vector<double>(fit.coef.data(), fit.coef.data() + fit.coef.size());
      f["se"] = std::vector<double>(fit.se.data(), fit.se.data() + fit.se.size());
      f["t_stat"] =
          std::vector<double>(fit.t_stat.data(), fit.t_stat.data() + fit.t_stat.size());
      f["r2"] = fit.r2;
      f["adj_r2"] = fit.adj_r2;
      f["nw_lags"] = fit.nw_lags;
      f["n_obs"] = fit.residuals.size();
      fits_json[tag][std::to_string(h)] = f;
    }
  }
  write_json_file(cfg.output_dir + "/fits.json", fits_json);
  write_insample_table(cfg.output_dir + "/table_insample.csv", one_day_fits);
  record_stage(cfg.output_dir, "fit", {cfg.output_dir + "/rv.csv"},
               {"fits.json", "table_insample.csv"});
}

// Out-of-sample evaluation with the in-sample coefficients held fixed.
inline forecast::EvalReport stage_evaluate(const RunConfig& cfg) {
  if (cfg.split.out_of_sample_start == 0 || cfg.split.out_of_sample_end == 0)
    throw ConfigError("evaluate stage needs the out-of-sample window");
  const HarInputs inputs = load_har_inputs(cfg);
  const nlohmann::json fits = read_json_file(cfg.output_dir + "/fits.json");

  std::map<std::string, std::map<int, forecast::ForecastSeries>> forecasts;
  std::vector<int> horizons;
  for (int h = 1; h <= cfg.har.max_horizon; ++h) horizons.push_back(h);

  for (const std::string& tag : har_model_tags(cfg)) {
    for (int h = 1; h <= cfg.har.max_horizon; ++h) {
      if (!fits.contains(tag) || !fits.at(tag).contains(std::to_string(h))) continue;
      const auto coef_vec =
          fits.at(tag).at(std::to_string(h)).at("coef").get<std::vector<double>>();
      Eigen::VectorXd coef =
          Eigen::Map<const Eigen::VectorXd>(coef_vec.data(),
                                            static_cast<Eigen::Index>(coef_vec.size()));

      forecast::HarDesign design = design_for(inputs, tag, h);
      forecast::ForecastSeries series;
      for (Eigen::Index r = 0; r < design.x.rows(); ++r) {
        const long i = inputs.rv.index_of(design.origin_dates[static_cast<std::size_t>(r)]);
        if (i < h) continue;  // previous h-day window must exist for MDA
        const std::size_t ui = static_cast<std::size_t>(i);
        const data::Date target_start = inputs.rv.dates[ui + 1];
        const data::Date target_end = inputs.rv.dates[ui + static_cast<std::size_t>(h)];
        if (target_start < cfg.split.out_of_sample_start ||
            target_end > cfg.split.out_of_sample_end)
          continue;
        series.actual.push_back(design.y(r));
        series.predicted.push_back(design.x.row(r).dot(coef));
        double prev = 0.0;
        for (int j = 0; j < h; ++j) prev += inputs.rv.log_rv[ui - static_cast<std::size_t>(j)];
        series.prev_actual.push_back(prev);
      }
      if (!series.actual.empty()) forecasts[tag][h] = std::move(series);
    }
  }

  const forecast::EvalReport report = forecast::evaluate(forecasts, horizons);
  write_json_file(cfg.output_dir + "/eval_report.json", report.to_json());
  write_oos_table(cfg.output_dir + "/table_oos.csv", report);
  write_dm_table(cfg.output_dir + "/table_dm.csv", report);
  write_horizon_curves(cfg.output_dir + "/horizon_curves.csv", report);
  write_boxplot_summary(cfg.output_dir + "/boxplot_summary.csv", report);
  record_stage(cfg.output_dir, "evaluate",
               {cfg.output_dir + "/rv.csv", cfg.output_dir + "/fits.json"},
               {"eval_report.json", "table_oos.csv", "table_dm.csv",
                "horizon_curves.csv", "boxplot_summary.csv"});
  return report;
}

// ---- synthetic study ---------------------------------------------------------

struct SynthStudyConfig {
  synth::MarketConfig market;
  RunConfig run;

  SynthStudyConfig() {
    market.n_days = 756;  // three trading years
    market.start_date = 20180102;
    run.models = {"rough_heston"};
    run.har.max_horizon = 5;
  }
};

inline SynthStudyConfig synth_config_from_json(const nlohmann::json& j) {
  SynthStudyConfig cfg;
  cfg.run = run_config_from_json(j);
  if (j.contains("market")) {
    const auto& m = j.at("market");
    if (m.contains("dgp")) cfg.market.dgp = models::model_params_from_json(m.at("dgp"));
    cfg.market.n_days = m.value("n_days", cfg.market.n_days);
    cfg.market.steps_per_day = m.value("steps_per_day", cfg.market.steps_per_day);
    cfg.market.quotes_per_day = m.value("quotes_per_day", cfg.market.quotes_per_day);
    cfg.market.price_noise = m.value("price_noise", cfg.market.price_noise);
    cfg.market.rate = m.value("rate", cfg.market.rate);
    cfg.market.start_date = m.value("start_date", cfg.market.start_date);
    if (m.contains("maturity_days"))
      cfg.market.maturity_days = m.at("maturity_days").get<std::vector<int>>();
  }
  return cfg;
}

// End-to-end deterministic study on a simulated market: export the market in
// the vendor schemas, then run ingest -> surrogate -> infer -> fit ->
// evaluate exactly as a real-data pipeline would.
inline forecast::EvalReport run_synth_study(SynthStudyConfig cfg) {
  cfg.market.seed = cfg.run.seed;
  const std::string dir = cfg.run.output_dir;
  fs::create_directories(dir);

  const synth::Market market = synth::simulate_market(cfg.market);
  export_market_csvs(market, dir + "/market");
  cfg.run.inputs.quotes = dir + "/market/quotes.csv";
  cfg.run.inputs.underlying = dir + "/market/underlying.csv";
  cfg.run.inputs.intraday = dir + "/market/intraday.csv";
  cfg.run.inputs.rates = dir + "/market/rates.csv";

  // split: the walk-forward path covers years 2..; hold out the last quarter
  // of that application period
  if (cfg.run.split.in_sample_end == 0) {
    const int first_year = data::date_year(market.dates.front());
    std::vector<data::Date> app_dates;
    for (data::Date d : market.dates)
      if (data::date_year(d) > first_year) app_dates.push_back(d);
    if (app_dates.size() < 80)
      throw ConfigError("synth study: market too short for a walk-forward split");
    const std::size_t cut = (app_dates.size() * 3) / 4;
    cfg.run.split.in_sample_end = app_dates[cut - 1];
    cfg.run.split.out_of_sample_start = app_dates[cut];
    cfg.run.split.out_of_sample_end = app_dates.back();
  }
  cfg.run.validate();

  stage_ingest(cfg.run);

  std::shared_ptr<const surrogate::PricingSurrogate> surrogate_model;
  const bool needs_surrogate =
      cfg.run.rough_backend == "surrogate" &&
      std::count(cfg.run.models.begin(), cfg.run.models.end(), "rough_heston") > 0;
  if (needs_surrogate) surrogate_model = stage_train_surrogate(cfg.run);

  for (const auto& model : cfg.run.models)
    stage_infer(cfg.run, model, surrogate_model);

  stage_fit(cfg.run);
  forecast::EvalReport report = stage_evaluate(cfg.run);

  // ground truth for verification studies
  nlohmann::json truth;
  truth["dgp"] = models::to_json(market.dgp);
  truth["dates"] = market.dates;
  truth["true_variance"] = market.true_variance;
  truth["integrated_var"] = market.integrated_var;
  write_json_file(dir + "/truth.json", truth);
  return report;
}

}  // namespace spotvol::cli
