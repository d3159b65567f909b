#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "spotvol/pricing/black_scholes.hpp"
#include "spotvol/surrogate/dataset.hpp"
#include "spotvol/surrogate/heatmap.hpp"
#include "spotvol/surrogate/mlp.hpp"
#include "spotvol/surrogate/surrogate.hpp"

using namespace spotvol;
using namespace spotvol::surrogate;
using Catch::Approx;

TEST_CASE("backpropagation gradients match central finite differences") {
  Mlp net(3, {5, 4}, 11);
  math::Rng rng(21);
  Eigen::MatrixXd x(3, 7);
  Eigen::RowVectorXd y(7);
  for (int c = 0; c < 7; ++c) {
    for (int r = 0; r < 3; ++r) x(r, c) = 2.0 * rng.uniform() - 1.0;
    y(c) = 2.0 * rng.uniform() - 1.0;
  }
  std::vector<Eigen::MatrixXd> gw;
  std::vector<Eigen::VectorXd> gb;
  net.loss_and_gradients(x, y, gw, gb);

  const double h = 1e-6;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (Eigen::Index r = 0; r < net.weights()[l].rows(); ++r)
      for (Eigen::Index c = 0; c < net.weights()[l].cols(); ++c) {
        const double orig = net.weights()[l](r, c);
        net.weights()[l](r, c) = orig + h;
        const double up = net.mse(x, y);
        net.weights()[l](r, c) = orig - h;
        const double dn = net.mse(x, y);
        net.weights()[l](r, c) = orig;
        const double fd = (up - dn) / (2.0 * h);
        REQUIRE(gw[l](r, c) == Approx(fd).epsilon(1e-5).margin(1e-9));
      }
    for (Eigen::Index r = 0; r < net.biases()[l].size(); ++r) {
      const double orig = net.biases()[l](r);
      net.biases()[l](r) = orig + h;
      const double up = net.mse(x, y);
      net.biases()[l](r) = orig - h;
      const double dn = net.mse(x, y);
      net.biases()[l](r) = orig;
      const double fd = (up - dn) / (2.0 * h);
      REQUIRE(gb[l](r) == Approx(fd).epsilon(1e-5).margin(1e-9));
    }
  }
}

TEST_CASE("training on a constant target collapses the loss") {
  const int n = 512;
  Eigen::MatrixXd x(1, n);
  Eigen::RowVectorXd y = Eigen::RowVectorXd::Constant(n, 0.37);
  math::Rng rng(3);
  for (int i = 0; i < n; ++i) x(0, i) = 2.0 * rng.uniform() - 1.0;

  Mlp net(1, {16}, 5);
  TrainConfig cfg;
  cfg.hidden = {16};
  cfg.epochs = 300;
  cfg.batch_size = 64;
  cfg.patience = 40;
  train_mlp(net, x, y, cfg, 5);
  REQUIRE(net.mse(x, y) < 1e-5);
  REQUIRE(net.forward(x)(0) == Approx(0.37).margin(1e-2));
}

TEST_CASE("mlp learns sin(x) to the spec tolerance") {
  const int n = 10000;
  Eigen::MatrixXd x(1, n);
  Eigen::RowVectorXd y(n);
  math::Rng rng(9);
  for (int i = 0; i < n; ++i) {
    x(0, i) = 2.0 * rng.uniform() - 1.0;
    y(i) = std::sin(3.0 * x(0, i));
  }
  Mlp net(1, {64, 64}, 1);
  TrainConfig cfg;
  cfg.hidden = {64, 64};
  cfg.epochs = 150;
  cfg.patience = 30;
  const TrainReport report = train_mlp(net, x, y, cfg, 1);
  REQUIRE(std::sqrt(report.best_val_loss) < 1e-2);
}

TEST_CASE("training is deterministic in the seed") {
  const int n = 256;
  Eigen::MatrixXd x(2, n);
  Eigen::RowVectorXd y(n);
  math::Rng rng(44);
  for (int i = 0; i < n; ++i) {
    x(0, i) = rng.uniform();
    x(1, i) = rng.uniform();
    y(i) = x(0, i) * x(1, i);
  }
  TrainConfig cfg;
  cfg.hidden = {8};
  cfg.epochs = 20;

  Mlp a(2, cfg.hidden, 77), b(2, cfg.hidden, 77);
  train_mlp(a, x, y, cfg, 77);
  train_mlp(b, x, y, cfg, 77);
  for (std::size_t l = 0; l < a.layer_count(); ++l)
    REQUIRE(a.weights()[l] == b.weights()[l]);
}

TEST_CASE("dataset generation basics") {
  TrainingBox box;
  REQUIRE(generate_dataset(box, 0, 1).samples.empty());

  const DatasetResult a = generate_dataset(box, 96, 31, 8);
  const DatasetResult b = generate_dataset(box, 96, 31, 8);
  REQUIRE(a.samples.size() == 96);
  REQUIRE(a.dropped == 0);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    REQUIRE(a.samples[i].x == b.samples[i].x);
    REQUIRE(a.samples[i].iv == b.samples[i].iv);
  }
  const DatasetResult c = generate_dataset(box, 96, 32, 8);
  REQUIRE(a.samples[0].x != c.samples[0].x);
}

TEST_CASE("dataset targets reproduce their quadrature prices through bs_price") {
  TrainingBox box;
  const DatasetResult data = generate_dataset(box, 64, 7, 8);
  for (const auto& s : data.samples) {
    pricing::ContractSpec c;
    c.spot = 1.0;
    c.strike = s.x[6];
    c.maturity = s.x[7];
    c.is_call = true;
    REQUIRE(pricing::bs_price(c, s.iv) == Approx(s.price).margin(1e-8));
    REQUIRE(box.contains(s.x));
    REQUIRE(s.iv > 0.0);
  }
}

TEST_CASE("surrogate save/load round-trip and box mismatch refusal") {
  TrainingBox box;
  const DatasetResult data = generate_dataset(box, 256, 13, 16);
  TrainConfig cfg;
  cfg.hidden = {16, 16};
  cfg.epochs = 30;
  const PricingSurrogate model = PricingSurrogate::fit(data.samples, box, cfg, 99);

  const std::string path = "surrogate_roundtrip_test.json";
  model.save(path);
  const PricingSurrogate loaded = PricingSurrogate::load(path);

  std::array<double, kInputDim> probe = data.samples[5].x;
  REQUIRE(loaded.predict(probe).iv == Approx(model.predict(probe).iv).epsilon(1e-14));

  TrainingBox other = box;
  other.hi[0] = 9.0;
  REQUIRE_THROWS_AS(PricingSurrogate::load(path, other), DataError);
  REQUIRE_NOTHROW(PricingSurrogate::load(path, box));
  std::filesystem::remove(path);
}

TEST_CASE("prediction flags extrapolation and batches match single calls") {
  TrainingBox box;
  const DatasetResult data = generate_dataset(box, 256, 17, 16);
  TrainConfig cfg;
  cfg.hidden = {16};
  cfg.epochs = 20;
  const PricingSurrogate model = PricingSurrogate::fit(data.samples, box, cfg, 3);

  std::vector<std::array<double, kInputDim>> inputs;
  for (int i = 0; i < 5; ++i) inputs.push_back(data.samples[static_cast<std::size_t>(i)].x);
  std::array<double, kInputDim> outside = inputs[0];
  outside[0] = box.hi[0] + 1.0;
  inputs.push_back(outside);

  const auto batch = model.predict_batch(inputs);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const PredictResult single = model.predict(inputs[i]);
    REQUIRE(batch[i].iv == Approx(single.iv).epsilon(1e-14));
    REQUIRE(batch[i].extrapolated == single.extrapolated);
  }
  REQUIRE_FALSE(batch[0].extrapolated);
  REQUIRE(batch.back().extrapolated);
}

TEST_CASE("normalisation constants can be folded into the output layer") {
  // de-normalised predictions must not depend on the normalisation pair
  // (y_mean, y_std) once the output layer absorbs the change
  TrainingBox box;
  const DatasetResult data = generate_dataset(box, 128, 23, 16);
  TrainConfig cfg;
  cfg.hidden = {8};
  cfg.epochs = 10;
  const PricingSurrogate model = PricingSurrogate::fit(data.samples, box, cfg, 4);
  const std::string path = "surrogate_norm_test.json";
  model.save(path);

  std::ifstream in(path);
  nlohmann::json j;
  in >> j;
  in.close();
  const double y_mean = j["y_mean"].get<double>();
  const double y_std = j["y_std"].get<double>();
  const double new_std = y_std * 2.0, new_mean = y_mean - 0.3;
  auto& last = j["layers"].back();
  auto w = last["weights"].get<std::vector<double>>();
  for (double& v : w) v *= y_std / new_std;
  last["weights"] = w;
  auto b = last["biases"].get<std::vector<double>>();
  for (double& v : b) v = (v * y_std + y_mean - new_mean) / new_std;
  last["biases"] = b;
  j["y_mean"] = new_mean;
  j["y_std"] = new_std;
  std::ofstream out(path);
  out << j.dump();
  out.close();

  const PricingSurrogate folded = PricingSurrogate::load(path);
  const auto probe = data.samples[3].x;
  REQUIRE(folded.predict(probe).iv == Approx(model.predict(probe).iv).epsilon(1e-12));
  std::filesystem::remove(path);
}

TEST_CASE("heatmap with predictor wired to the reference is all zero") {
  TrainingBox box;
  int calls = 0;
  PointIv ref = [&calls](const std::array<double, kInputDim>& x) {
    ++calls;
    return 0.2 + 0.1 * x[6];
  };
  const AccuracyReport report = evaluate_heatmap(ref, ref, box, 3, 5);
  REQUIRE(report.k_buckets() == 4);
  REQUIRE(report.tau_buckets() == 4);
  for (std::size_t r = 0; r < report.k_buckets(); ++r)
    for (std::size_t c = 0; c < report.tau_buckets(); ++c) {
      REQUIRE_FALSE(report.missing(r, c));
      REQUIRE(report.mean_ape[r][c] == 0.0);
      REQUIRE(report.max_ape[r][c] == 0.0);
    }
  REQUIRE(calls > 0);
}

TEST_CASE("heatmap reports buckets outside the box as missing") {
  TrainingBox box;
  box.lo[7] = 100.0 / 365.0;  // maturities below 100 days unreachable
  PointIv ref = [](const std::array<double, kInputDim>&) { return 0.2; };
  const AccuracyReport report = evaluate_heatmap(ref, ref, box, 2, 5);
  REQUIRE(report.missing(0, 0));   // 7-45 day column
  REQUIRE_FALSE(report.missing(0, 3));
}
