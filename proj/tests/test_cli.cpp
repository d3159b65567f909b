#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "spotvol/cli/pipeline.hpp"
#include "spotvol/cli/run_config.hpp"

using namespace spotvol;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

synth::Market tiny_market(int days = 60) {
  synth::MarketConfig cfg;
  cfg.dgp = models::ModelParams{models::HestonParams{2.0, 0.04, 0.3, -0.7, 0.04}};
  cfg.n_days = days;
  cfg.quotes_per_day = 18;
  cfg.maturity_days = {30, 91};
  cfg.seed = 33;
  cfg.start_date = 20190102;
  return synth::simulate_market(cfg);
}

// spot-path file as the infer stage would emit, but taken from the truth
void write_fake_spot(const std::string& dir, const std::string& model,
                     const synth::Market& market) {
  nlohmann::json path;
  path["dates"] = market.dates;
  path["v_hat"] = market.true_variance;
  std::vector<double> rmse(market.dates.size(), 0.001);
  std::vector<int> usable(market.dates.size(), 1);
  path["option_rmse"] = rmse;
  path["usable"] = usable;
  nlohmann::json j;
  j["model"] = model;
  j["backend"] = "quadrature";
  j["path"] = path;
  cli::write_json_file(dir + "/spot_" + model + ".json", j);
}

}  // namespace

TEST_CASE("run config validation") {
  nlohmann::json j;
  j["split"] = {{"in_sample_end", 20200601}, {"out_of_sample_start", 20200101}};
  REQUIRE_THROWS_AS(cli::run_config_from_json(j), ConfigError);

  j["split"] = {{"in_sample_end", 20200101},
                {"out_of_sample_start", 20200102},
                {"out_of_sample_end", 20200601}};
  j["models"] = {"heston", "garch"};
  REQUIRE_THROWS_AS(cli::run_config_from_json(j), ConfigError);

  j["models"] = {"heston"};
  REQUIRE_NOTHROW(cli::run_config_from_json(j));
}

TEST_CASE("ingest stage round-trips the synthetic market") {
  TempDir tmp("spotvol_cli_ingest");
  const synth::Market market = tiny_market();
  cli::export_market_csvs(market, tmp.str() + "/market");

  cli::RunConfig cfg;
  cfg.output_dir = tmp.str();
  cfg.inputs.quotes = tmp.str() + "/market/quotes.csv";
  cfg.inputs.underlying = tmp.str() + "/market/underlying.csv";
  cfg.inputs.intraday = tmp.str() + "/market/intraday.csv";
  cfg.inputs.rates = tmp.str() + "/market/rates.csv";
  cli::stage_ingest(cfg);

  REQUIRE(fs::exists(tmp.path / "panels.csv"));
  REQUIRE(fs::exists(tmp.path / "rv.csv"));
  REQUIRE(fs::exists(tmp.path / "manifest.json"));

  const auto panels = cli::read_panels_csv(tmp.str() + "/panels.csv");
  std::size_t total_in = 0, total_back = 0;
  for (const auto& p : market.panels) total_in += p.quotes.size();
  for (const auto& p : panels) total_back += p.quotes.size();
  REQUIRE(total_in == total_back);

  const data::RVSeries rv = cli::read_rv_csv(tmp.str() + "/rv.csv");
  REQUIRE(rv.size() == market.rv.size());
  REQUIRE(rv.log_rv[5] == Approx(market.rv.log_rv[5]).epsilon(1e-10));

  const nlohmann::json report = cli::read_json_file(tmp.str() + "/filter_report.json");
  REQUIRE(report.at("totals").at("kept").get<std::size_t>() == total_in);
}

TEST_CASE("fit and evaluate stages work from intermediates and enforce inputs") {
  TempDir tmp("spotvol_cli_fit");
  const synth::Market market = tiny_market(160);

  cli::RunConfig cfg;
  cfg.output_dir = tmp.str();
  cfg.models = {"heston"};
  cfg.har.max_horizon = 2;
  cfg.split.in_sample_end = market.dates[120];
  cfg.split.out_of_sample_start = market.dates[121];
  cfg.split.out_of_sample_end = market.dates.back();

  // missing intermediates are reported by name
  REQUIRE_THROWS_WITH(cli::stage_fit(cfg),
                      Catch::Matchers::ContainsSubstring("rv.csv"));

  cli::write_rv_csv(tmp.str() + "/rv.csv", market.rv);
  write_fake_spot(tmp.str(), "heston", market);
  cli::stage_fit(cfg);
  REQUIRE(fs::exists(tmp.path / "fits.json"));
  REQUIRE(fs::exists(tmp.path / "table_insample.csv"));

  const nlohmann::json fits = cli::read_json_file(tmp.str() + "/fits.json");
  REQUIRE(fits.contains("HAR-RV"));
  REQUIRE(fits.contains("HAR-RV-Heston"));
  // the true spot variance is a strong predictor: adding it helps in-sample
  REQUIRE(fits.at("HAR-RV-Heston").at("1").at("r2").get<double>() >=
          fits.at("HAR-RV").at("1").at("r2").get<double>());

  const forecast::EvalReport report = cli::stage_evaluate(cfg);
  REQUIRE(report.models == std::vector<std::string>{"HAR-RV", "HAR-RV-Heston"});
  REQUIRE(fs::exists(tmp.path / "eval_report.json"));
  REQUIRE(fs::exists(tmp.path / "table_oos.csv"));
  REQUIRE(fs::exists(tmp.path / "table_dm.csv"));

  // with only the baseline selected the report contains exactly one model
  cli::RunConfig base_only = cfg;
  base_only.models = {};
  const forecast::EvalReport single = cli::stage_evaluate(base_only);
  REQUIRE(single.models == std::vector<std::string>{"HAR-RV"});
}

TEST_CASE("surrogate stage caches and refuses stale boxes") {
  TempDir tmp("spotvol_cli_surrogate");
  cli::RunConfig cfg;
  cfg.output_dir = tmp.str();
  cfg.seed = 5;
  cfg.surrogate_cfg.path = tmp.str() + "/surrogate.json";
  cfg.surrogate_cfg.samples = 300;
  cfg.surrogate_cfg.strikes_per_surface = 10;
  cfg.surrogate_cfg.train.hidden = {8};
  cfg.surrogate_cfg.train.epochs = 4;

  bool cache_hit = true;
  auto first = cli::stage_train_surrogate(cfg, &cache_hit);
  REQUIRE_FALSE(cache_hit);
  REQUIRE(fs::exists(cfg.surrogate_cfg.path));

  auto second = cli::stage_train_surrogate(cfg, &cache_hit);
  REQUIRE(cache_hit);
  REQUIRE(second->predict(first->box().lo).iv ==
          Approx(first->predict(first->box().lo).iv));

  // a different box must not silently reuse the cached weights
  cfg.surrogate_cfg.box.hi[0] = 9.0;
  cfg.surrogate_cfg.train.epochs = 2;
  auto third = cli::stage_train_surrogate(cfg, &cache_hit);
  REQUIRE_FALSE(cache_hit);
  REQUIRE(third->box().hi[0] == 9.0);
}

TEST_CASE("manifest records hashed inputs per stage") {
  TempDir tmp("spotvol_cli_manifest");
  const std::string input = tmp.str() + "/input.txt";
  std::ofstream(input) << "payload";
  cli::record_stage(tmp.str(), "stage-a", {input}, {"out.bin"});
  const nlohmann::json manifest = cli::read_json_file(tmp.str() + "/manifest.json");
  REQUIRE(manifest.contains("stage-a"));
  REQUIRE(manifest.at("stage-a").at("inputs").size() == 1);
  REQUIRE(manifest.at("stage-a").at("outputs")[0] == "out.bin");
  REQUIRE_THROWS_WITH(cli::record_stage(tmp.str(), "stage-b", {tmp.str() + "/gone.txt"}, {}),
                      Catch::Matchers::ContainsSubstring("gone.txt"));
}
