#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotvol/data/dates.hpp"
#include "spotvol/data/quotes.hpp"
#include "spotvol/errors.hpp"
#include "spotvol/inference/estimator.hpp"
#include "spotvol/surrogate/dataset.hpp"
#include "spotvol/surrogate/mlp.hpp"

namespace spotvol::cli {

// One declarative run configuration; CLI flags override individual fields.
// Defaults are the documented artifact defaults (lambda_n = 0.2, n = 20
// kernel factors, plug-in Newey-West lags, the standard surrogate box).
struct RunConfig {
  std::uint64_t seed = 7;
  std::string output_dir = "out";

  struct {
    std::string quotes, underlying, intraday, rates, vix;
  } inputs;

  std::vector<std::string> models{"heston", "bates", "svcj", "rough_heston"};

  struct {
    data::Date in_sample_end = 0;
    data::Date out_of_sample_start = 0;
    data::Date out_of_sample_end = 0;
  } split;

  inference::InferenceConfig inference;
  std::string rough_backend = "surrogate";  // backend for rough Heston

  struct {
    std::string path = "surrogate_model.json";
    std::size_t samples = 200000;
    int strikes_per_surface = 16;
    surrogate::TrainingBox box;
    surrogate::TrainConfig train;
  } surrogate_cfg;

  struct {
    int max_horizon = 21;
    int nw_lags = -1;  // plug-in rule
  } har;

  data::FilterConfig filters;

  void validate() const {
    if (split.in_sample_end != 0 && split.out_of_sample_start != 0 &&
        !(split.in_sample_end < split.out_of_sample_start))
      throw ConfigError("config: out_of_sample_start must come after in_sample_end");
    if (split.out_of_sample_start != 0 && split.out_of_sample_end != 0 &&
        !(split.out_of_sample_start <= split.out_of_sample_end))
      throw ConfigError("config: out-of-sample window is empty");
    if (har.max_horizon < 1 || har.max_horizon > 22)
      throw ConfigError("config: har.max_horizon must be in 1..22");
    inference.validate();
    for (const auto& m : models)
      if (m != "heston" && m != "bates" && m != "svcj" && m != "rough_heston")
        throw ConfigError("config: unknown model \"" + m + "\"");
  }
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  if (j.contains("data")) {
    const auto& d = j.at("data");
    cfg.inputs.quotes = d.value("quotes", "");
    cfg.inputs.underlying = d.value("underlying", "");
    cfg.inputs.intraday = d.value("intraday", "");
    cfg.inputs.rates = d.value("rates", "");
    cfg.inputs.vix = d.value("vix", "");
  }
  if (j.contains("models")) cfg.models = j.at("models").get<std::vector<std::string>>();
  if (j.contains("split")) {
    const auto& s = j.at("split");
    cfg.split.in_sample_end = s.value("in_sample_end", 0);
    cfg.split.out_of_sample_start = s.value("out_of_sample_start", 0);
    cfg.split.out_of_sample_end = s.value("out_of_sample_end", 0);
  }
  if (j.contains("inference")) {
    const auto& i = j.at("inference");
    cfg.inference.lambda_n = i.value("lambda_n", cfg.inference.lambda_n);
    cfg.inference.max_outer_iter = i.value("max_outer_iter", cfg.inference.max_outer_iter);
    cfg.inference.objective_tol = i.value("objective_tol", cfg.inference.objective_tol);
    cfg.inference.nm_max_evals = i.value("nm_max_evals", cfg.inference.nm_max_evals);
    cfg.rough_backend = i.value("rough_backend", cfg.rough_backend);
  }
  if (j.contains("surrogate")) {
    const auto& s = j.at("surrogate");
    cfg.surrogate_cfg.path = s.value("path", cfg.surrogate_cfg.path);
    cfg.surrogate_cfg.samples = s.value("samples", cfg.surrogate_cfg.samples);
    cfg.surrogate_cfg.strikes_per_surface =
        s.value("strikes_per_surface", cfg.surrogate_cfg.strikes_per_surface);
    if (s.contains("box")) {
      cfg.surrogate_cfg.box.lo = s.at("box").at("lo").get<std::array<double, 8>>();
      cfg.surrogate_cfg.box.hi = s.at("box").at("hi").get<std::array<double, 8>>();
    }
    if (s.contains("train")) {
      const auto& t = s.at("train");
      cfg.surrogate_cfg.train.hidden =
          t.value("hidden", cfg.surrogate_cfg.train.hidden);
      cfg.surrogate_cfg.train.epochs = t.value("epochs", cfg.surrogate_cfg.train.epochs);
      cfg.surrogate_cfg.train.batch_size =
          t.value("batch_size", cfg.surrogate_cfg.train.batch_size);
      cfg.surrogate_cfg.train.learning_rate =
          t.value("learning_rate", cfg.surrogate_cfg.train.learning_rate);
      cfg.surrogate_cfg.train.patience =
          t.value("patience", cfg.surrogate_cfg.train.patience);
    }
  }
  if (j.contains("har")) {
    cfg.har.max_horizon = j.at("har").value("max_horizon", cfg.har.max_horizon);
    cfg.har.nw_lags = j.at("har").value("nw_lags", cfg.har.nw_lags);
  }
  if (j.contains("filters")) {
    const auto& f = j.at("filters");
    cfg.filters.min_maturity_days =
        f.value("min_maturity_days", cfg.filters.min_maturity_days);
    cfg.filters.max_maturity_days =
        f.value("max_maturity_days", cfg.filters.max_maturity_days);
    cfg.filters.min_mid = f.value("min_mid", cfg.filters.min_mid);
    cfg.filters.max_rel_spread = f.value("max_rel_spread", cfg.filters.max_rel_spread);
  }
  cfg.validate();
  return cfg;
}

}  // namespace spotvol::cli
