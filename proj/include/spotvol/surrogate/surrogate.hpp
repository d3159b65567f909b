#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotvol/errors.hpp"
#include "spotvol/pricing/black_scholes.hpp"
#include "spotvol/surrogate/dataset.hpp"
#include "spotvol/surrogate/mlp.hpp"

namespace spotvol::surrogate {

struct PredictResult {
  double iv = 0.0;
  bool extrapolated = false;  // input fell outside the training box
};

// Trained pricing surrogate: an MLP on normalised features predicting log
// implied vol, carrying its own normalisation constants and training box.
// Fitting the log targets makes the squared loss a relative-error loss,
// which is what the percentage-error acceptance gates measure. Moneyness and
// maturity enter as (log k / sqrt(tau), log tau) - the surface is far
// smoother in those coordinates, especially at the short end.
class PricingSurrogate {
public:
  static constexpr int kFormatVersion = 1;
  static constexpr const char* kFeatureTag = "std_moneyness_logtau_v1";

  static PricingSurrogate fit(const std::vector<SurrogateSample>& samples,
                              const TrainingBox& box, const TrainConfig& cfg,
                              std::uint64_t seed) {
    if (samples.size() < 64)
      throw DomainError("surrogate fit: need at least 64 samples");
    PricingSurrogate model;
    model.box_ = box;
    model.seed_ = seed;

    Eigen::MatrixXd x(kInputDim, static_cast<Eigen::Index>(samples.size()));
    Eigen::RowVectorXd y(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      model.fill_features(samples[i].x, x, static_cast<Eigen::Index>(i));
      y(static_cast<Eigen::Index>(i)) = std::log(samples[i].iv);
    }
    model.y_mean_ = y.mean();
    model.y_std_ = std::sqrt((y.array() - model.y_mean_).square().mean());
    if (!(model.y_std_ > 0.0)) model.y_std_ = 1.0;
    y = ((y.array() - model.y_mean_) / model.y_std_).matrix();

    model.net_ = Mlp(kInputDim, cfg.hidden, seed);
    model.report_ = train_mlp(model.net_, x, y, cfg, seed);
    model.hidden_ = cfg.hidden;
    return model;
  }

  PredictResult predict(const std::array<double, kInputDim>& input) const {
    Eigen::MatrixXd x(kInputDim, 1);
    fill_features(input, x, 0);
    PredictResult out;
    out.extrapolated = !box_.contains(input);
    out.iv = std::exp(net_.forward(x)(0) * y_std_ + y_mean_);
    return out;
  }

  std::vector<PredictResult> predict_batch(
      std::span<const std::array<double, kInputDim>> inputs) const {
    Eigen::MatrixXd x(kInputDim, static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t i = 0; i < inputs.size(); ++i)
      fill_features(inputs[i], x, static_cast<Eigen::Index>(i));
    const Eigen::RowVectorXd raw = net_.forward(x);
    std::vector<PredictResult> out(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      out[i].extrapolated = !box_.contains(inputs[i]);
      out[i].iv = std::exp(raw(static_cast<Eigen::Index>(i)) * y_std_ + y_mean_);
    }
    return out;
  }

  const TrainingBox& box() const { return box_; }
  const TrainReport& report() const { return report_; }
  const Mlp& net() const { return net_; }

  void save(const std::string& path) const {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["activation"] = "tanh";
    j["features"] = kFeatureTag;
    j["hidden"] = hidden_;
    j["box"] = {{"lo", box_.lo}, {"hi", box_.hi}};
    j["y_mean"] = y_mean_;
    j["y_std"] = y_std_;
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < net_.layer_count(); ++l) {
      const Eigen::MatrixXd& w = net_.weights()[l];
      nlohmann::json layer;
      layer["rows"] = w.rows();
      layer["cols"] = w.cols();
      std::vector<double> flat(static_cast<std::size_t>(w.size()));
      Eigen::Map<Eigen::MatrixXd>(flat.data(), w.rows(), w.cols()) = w;
      layer["weights"] = flat;
      const Eigen::VectorXd& b = net_.biases()[l];
      layer["biases"] = std::vector<double>(b.data(), b.data() + b.size());
      layers.push_back(layer);
    }
    j["layers"] = layers;
    j["training"] = {{"seed", seed_},
                     {"epochs_run", report_.epochs_run},
                     {"early_stopped", report_.early_stopped},
                     {"best_val_loss", report_.best_val_loss},
                     {"val_loss", report_.val_loss}};
    std::ofstream out(path);
    if (!out) throw DataError("surrogate save: cannot open " + path);
    out << j.dump();
  }

  // Loading refuses a weight file whose training box does not match the one
  // the caller expects to work in.
  static PricingSurrogate load(const std::string& path,
                               const std::optional<TrainingBox>& expected_box =
                                   std::nullopt) {
    std::ifstream in(path);
    if (!in) throw DataError("surrogate load: cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("surrogate load: malformed json: " + std::string(e.what()));
    }
    if (j.value("format_version", -1) != kFormatVersion)
      throw DataError("surrogate load: unsupported format_version");
    if (j.value("features", "") != kFeatureTag)
      throw DataError("surrogate load: unknown feature map");

    PricingSurrogate model;
    model.box_.lo = j.at("box").at("lo").get<std::array<double, kInputDim>>();
    model.box_.hi = j.at("box").at("hi").get<std::array<double, kInputDim>>();
    if (expected_box && !(model.box_ == *expected_box))
      throw DataError("surrogate load: training box mismatch");
    model.y_mean_ = j.at("y_mean").get<double>();
    model.y_std_ = j.at("y_std").get<double>();
    model.hidden_ = j.at("hidden").get<std::vector<int>>();
    model.seed_ = j.at("training").at("seed").get<std::uint64_t>();
    model.report_.epochs_run = j.at("training").at("epochs_run").get<int>();
    model.report_.best_val_loss = j.at("training").at("best_val_loss").get<double>();
    model.report_.val_loss = j.at("training").at("val_loss").get<std::vector<double>>();

    model.net_ = Mlp(kInputDim, model.hidden_, model.seed_);
    const auto& layers = j.at("layers");
    if (layers.size() != model.net_.layer_count())
      throw DataError("surrogate load: layer count mismatch");
    for (std::size_t l = 0; l < model.net_.layer_count(); ++l) {
      const auto& layer = layers[l];
      const Eigen::Index rows = layer.at("rows").get<Eigen::Index>();
      const Eigen::Index cols = layer.at("cols").get<Eigen::Index>();
      if (rows != model.net_.weights()[l].rows() ||
          cols != model.net_.weights()[l].cols())
        throw DataError("surrogate load: layer shape mismatch");
      const auto flat = layer.at("weights").get<std::vector<double>>();
      model.net_.weights()[l] =
          Eigen::Map<const Eigen::MatrixXd>(flat.data(), rows, cols);
      const auto b = layer.at("biases").get<std::vector<double>>();
      model.net_.biases()[l] =
          Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    }
    return model;
  }

private:
  // Raw inputs -> features -> [-1,1] normalisation. Feature bounds follow
  // from the box corners: |log k|/sqrt(tau) is largest at the shortest
  // maturity.
  void fill_features(const std::array<double, kInputDim>& in, Eigen::MatrixXd& x,
                     Eigen::Index col) const {
    for (int d = 0; d < 6; ++d) {
      const std::size_t i = static_cast<std::size_t>(d);
      x(d, col) = 2.0 * (in[i] - box_.lo[i]) / (box_.hi[i] - box_.lo[i]) - 1.0;
    }
    const double m = std::log(in[6]) / std::sqrt(in[7]);
    const double m_hi = std::max(std::abs(std::log(box_.lo[6])),
                                 std::abs(std::log(box_.hi[6]))) /
                        std::sqrt(box_.lo[7]);
    x(6, col) = m / m_hi;
    const double lt_lo = std::log(box_.lo[7]), lt_hi = std::log(box_.hi[7]);
    x(7, col) = 2.0 * (std::log(in[7]) - lt_lo) / (lt_hi - lt_lo) - 1.0;
  }

  Mlp net_;
  TrainingBox box_;
  std::vector<int> hidden_;
  double y_mean_ = 0.0, y_std_ = 1.0;
  std::uint64_t seed_ = 0;
  TrainReport report_;
};

}  // namespace spotvol::surrogate
