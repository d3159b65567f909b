#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spotvol/cli/io.hpp"
#include "spotvol/cli/pipeline.hpp"
#include "spotvol/cli/run_config.hpp"
#include "spotvol/models/chf.hpp"
#include "spotvol/models/simulate.hpp"
#include "spotvol/pricing/fourier.hpp"

using namespace spotvol;

namespace {

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

cli::RunConfig load_config(const std::string& path) {
  return cli::run_config_from_json(cli::read_json_file(path));
}

int cmd_price(const std::string& params_path, const std::string& strikes_csv,
              const std::string& maturities_csv, double spot, double rate,
              double div, const std::string& backend,
              const std::string& surrogate_path, const std::string& out_path) {
  const models::ModelParams params =
      models::model_params_from_json(cli::read_json_file(params_path));
  const std::vector<double> strikes = parse_list(strikes_csv);
  const std::vector<double> maturities = parse_list(maturities_csv);

  std::shared_ptr<const surrogate::PricingSurrogate> surrogate_model;
  if (backend == "surrogate") {
    if (surrogate_path.empty())
      throw ConfigError("price: surrogate backend needs --surrogate-file");
    if (!std::holds_alternative<models::RoughHestonParams>(params))
      throw ConfigError("price: surrogate backend prices rough_heston only");
    surrogate_model = std::make_shared<surrogate::PricingSurrogate>(
        surrogate::PricingSurrogate::load(surrogate_path));
  } else if (backend != "quadrature") {
    throw ConfigError("price: unknown backend \"" + backend + "\"");
  }

  std::vector<std::vector<std::string>> rows;
  for (double tau : maturities) {
    pricing::FourierGrid grid;
    if (backend == "quadrature") {
      double max_logk = 0.0;
      for (double k : strikes)
        max_logk = std::max(max_logk, std::abs(std::log(k / spot)));
      grid = pricing::FourierGrid::build(models::make_batch_chf(params, tau, rate, div),
                                         tau, max_logk);
    }
    for (double strike : strikes) {
      pricing::ContractSpec c;
      c.spot = spot;
      c.strike = strike;
      c.maturity = tau;
      c.rate = rate;
      c.div_yield = div;
      c.is_call = true;
      double price = 0.0, iv = 0.0, vega = 0.0;
      if (backend == "quadrature") {
        price = grid.call_price(spot, strike, rate, div, tau);
        try {
          iv = pricing::implied_vol(c, price);
          vega = pricing::bs_vega(c, iv);
        } catch (const DomainError&) {
          iv = std::numeric_limits<double>::quiet_NaN();
          vega = iv;
        }
      } else {
        const auto& rough = std::get<models::RoughHestonParams>(params);
        const double k_fwd = strike / spot * std::exp(-(rate - div) * tau);
        iv = surrogate_model
                 ->predict({rough.base.lambda, rough.base.theta, rough.base.nu,
                            rough.base.rho, rough.base.v0, rough.hurst, k_fwd, tau})
                 .iv;
        price = pricing::bs_price(c, iv);
        vega = pricing::bs_vega(c, iv);
      }
      rows.push_back({cli::fmt(strike, 10), cli::fmt(tau, 10), cli::fmt(price),
                      cli::fmt(iv, 8), cli::fmt(vega, 8)});
    }
  }
  data::write_csv(out_path, {"strike", "maturity", "price", "implied_vol", "vega"},
                  rows);
  std::cout << "wrote " << rows.size() << " prices to " << out_path << "\n";
  return 0;
}

int cmd_simulate(const std::string& params_path, double horizon_days,
                 int steps_per_day, int n_paths, std::uint64_t seed, double rate,
                 const std::string& out_path) {
  const models::ModelParams params =
      models::model_params_from_json(cli::read_json_file(params_path));
  const auto ensemble = models::simulate_paths(
      params, std::nullopt, horizon_days / models::kTradingDaysPerYear,
      steps_per_day, n_paths, seed, rate);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t p = 0; p < ensemble.log_price.size(); ++p)
    for (std::size_t k = 0; k < ensemble.log_price[p].size(); ++k)
      rows.push_back({std::to_string(p), std::to_string(k),
                      cli::fmt(ensemble.log_price[p][k]),
                      cli::fmt(ensemble.variance[p][k])});
  data::write_csv(out_path, {"path", "step", "log_price", "variance"}, rows);
  std::cout << "wrote " << n_paths << " paths to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spot-volatility extraction and realized-volatility forecasting"};
  app.require_subcommand(1);

  // price
  auto* price = app.add_subcommand("price", "price a strike x maturity grid");
  std::string price_params, price_strikes, price_maturities;
  std::string price_backend = "quadrature", price_surrogate, price_out = "prices.csv";
  double price_spot = 100.0, price_rate = 0.0, price_div = 0.0;
  price->add_option("--params", price_params, "model params json")->required();
  price->add_option("--strikes", price_strikes, "comma-separated strikes");
  price->add_option("--maturities", price_maturities, "comma-separated year fractions");
  price->add_option("--spot", price_spot);
  price->add_option("--rate", price_rate);
  price->add_option("--div", price_div);
  price->add_option("--backend", price_backend, "quadrature | surrogate");
  price->add_option("--surrogate-file", price_surrogate);
  price->add_option("--out", price_out);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate model paths");
  std::string sim_params, sim_out = "paths.csv";
  double sim_days = 252.0, sim_rate = 0.0;
  int sim_steps = 78, sim_paths = 1;
  std::uint64_t sim_seed = 1;
  sim->add_option("--params", sim_params)->required();
  sim->add_option("--days", sim_days, "horizon in trading days");
  sim->add_option("--steps-per-day", sim_steps);
  sim->add_option("--paths", sim_paths);
  sim->add_option("--seed", sim_seed);
  sim->add_option("--rate", sim_rate);
  sim->add_option("--out", sim_out);

  // config-driven stages
  std::string config_path;
  auto add_config = [&config_path](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration json")->required();
  };
  auto* train = app.add_subcommand("train-surrogate", "train the pricing surrogate");
  add_config(train);
  auto* ingest = app.add_subcommand("ingest", "filter panels and build the rv series");
  add_config(ingest);
  auto* infer = app.add_subcommand("infer", "walk-forward spot variance inference");
  add_config(infer);
  std::string infer_model;
  infer->add_option("--model", infer_model, "restrict to one model");
  auto* fit = app.add_subcommand("fit", "in-sample HAR fits");
  add_config(fit);
  auto* evaluate = app.add_subcommand("evaluate", "out-of-sample evaluation");
  add_config(evaluate);
  auto* pipeline = app.add_subcommand("pipeline", "ingest -> infer -> fit -> evaluate");
  add_config(pipeline);

  // synth-study
  auto* synth_cmd = app.add_subcommand("synth-study", "end-to-end synthetic study");
  std::string synth_out = "synth_out", synth_config;
  std::uint64_t synth_seed = 7;
  synth_cmd->add_option("--out", synth_out);
  synth_cmd->add_option("--seed", synth_seed);
  synth_cmd->add_option("--config", synth_config, "optional run-config overrides");

  CLI11_PARSE(app, argc, argv);

  try {
    if (price->parsed())
      return cmd_price(price_params, price_strikes, price_maturities, price_spot,
                       price_rate, price_div, price_backend, price_surrogate,
                       price_out);
    if (sim->parsed())
      return cmd_simulate(sim_params, sim_days, sim_steps, sim_paths, sim_seed,
                          sim_rate, sim_out);
    if (train->parsed()) {
      const cli::RunConfig cfg = load_config(config_path);
      bool cache_hit = false;
      cli::stage_train_surrogate(cfg, &cache_hit);
      std::cout << (cache_hit ? "surrogate cache hit: " : "trained surrogate: ")
                << cfg.surrogate_cfg.path << "\n";
      return 0;
    }
    if (ingest->parsed()) {
      cli::stage_ingest(load_config(config_path));
      std::cout << "ingest complete\n";
      return 0;
    }
    if (infer->parsed()) {
      const cli::RunConfig cfg = load_config(config_path);
      std::shared_ptr<const surrogate::PricingSurrogate> surrogate_model;
      const bool rough_requested =
          infer_model == "rough_heston" ||
          (infer_model.empty() &&
           std::count(cfg.models.begin(), cfg.models.end(), "rough_heston") > 0);
      if (rough_requested && cfg.rough_backend == "surrogate") {
        bool cache_hit = false;
        surrogate_model = cli::stage_train_surrogate(cfg, &cache_hit);
        if (cache_hit) std::cout << "surrogate cache hit\n";
      }
      for (const auto& model : cfg.models) {
        if (!infer_model.empty() && model != infer_model) continue;
        cli::stage_infer(cfg, model, surrogate_model);
        std::cout << "inferred " << model << "\n";
      }
      return 0;
    }
    if (fit->parsed()) {
      cli::stage_fit(load_config(config_path));
      std::cout << "fit complete\n";
      return 0;
    }
    if (evaluate->parsed()) {
      cli::stage_evaluate(load_config(config_path));
      std::cout << "evaluation complete\n";
      return 0;
    }
    if (pipeline->parsed()) {
      const cli::RunConfig cfg = load_config(config_path);
      cli::stage_ingest(cfg);
      std::shared_ptr<const surrogate::PricingSurrogate> surrogate_model;
      if (cfg.rough_backend == "surrogate" &&
          std::count(cfg.models.begin(), cfg.models.end(), "rough_heston") > 0) {
        bool cache_hit = false;
        surrogate_model = cli::stage_train_surrogate(cfg, &cache_hit);
        if (cache_hit) std::cout << "surrogate cache hit\n";
      }
      for (const auto& model : cfg.models)
        cli::stage_infer(cfg, model, surrogate_model);
      cli::stage_fit(cfg);
      cli::stage_evaluate(cfg);
      std::cout << "pipeline complete: " << cfg.output_dir << "\n";
      return 0;
    }
    if (synth_cmd->parsed()) {
      cli::SynthStudyConfig cfg;
      if (!synth_config.empty())
        cfg = cli::synth_config_from_json(cli::read_json_file(synth_config));
      cfg.run.output_dir = synth_out;
      cfg.run.seed = synth_seed;
      cli::run_synth_study(cfg);
      std::cout << "synthetic study complete: " << synth_out << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
