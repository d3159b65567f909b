#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "spotvol/errors.hpp"
#include "spotvol/math/rng.hpp"

namespace spotvol::surrogate {

struct TrainConfig {
  std::vector<int> hidden{128, 128, 128, 128};
  int epochs = 200;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double lr_decay = 0.5;        // applied at schedule milestones and on stalls
  int patience = 12;            // epochs without improvement before stopping
  double validation_fraction = 0.1;
};

// Dense multilayer perceptron with tanh hidden units and a linear output,
// trained by mini-batch Adam on mean squared error. Everything is seeded:
// init, shuffling and the train/validation split, so identical
// seed/config/data give identical final weights.
class Mlp {
public:
  Mlp() = default;

  Mlp(int input_dim, const std::vector<int>& hidden, std::uint64_t seed) {
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int h : hidden) dims.push_back(h);
    dims.push_back(1);
    math::Rng rng(seed ^ 0x5eedf00dULL);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const int in = dims[l], out = dims[l + 1];
      Eigen::MatrixXd w(out, in);
      const double scale = std::sqrt(6.0 / (in + out));
      for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c)
          w(r, c) = scale * (2.0 * rng.uniform() - 1.0);
      weights_.push_back(std::move(w));
      biases_.push_back(Eigen::VectorXd::Zero(out));
    }
    // zero output layer: training starts from the constant fit and does not
    // have to cancel random hidden-feature wiggles
    weights_.back().setZero();
  }

  int input_dim() const { return weights_.empty() ? 0 : static_cast<int>(weights_.front().cols()); }
  std::size_t layer_count() const { return weights_.size(); }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }

  // Forward pass on a batch (columns are samples); returns a row vector.
  Eigen::RowVectorXd forward(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      a = (weights_[l] * a).colwise() + biases_[l];
      if (l + 1 < weights_.size()) a = a.array().tanh();
    }
    return a.row(0);
  }

  // Mean squared error plus gradients for one batch; used by the optimiser
  // and by the finite-difference gradient check.
  double loss_and_gradients(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y,
                            std::vector<Eigen::MatrixXd>& grad_w,
                            std::vector<Eigen::VectorXd>& grad_b) const {
    const std::size_t layers = weights_.size();
    std::vector<Eigen::MatrixXd> activations(layers + 1);
    activations[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
      Eigen::MatrixXd z = (weights_[l] * activations[l]).colwise() + biases_[l];
      activations[l + 1] = (l + 1 < layers) ? z.array().tanh().matrix() : z;
    }
    const double inv_n = 1.0 / static_cast<double>(x.cols());
    Eigen::MatrixXd delta = (activations[layers].row(0) - y) * (2.0 * inv_n);

    grad_w.resize(layers);
    grad_b.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
      grad_w[l] = delta * activations[l].transpose();
      grad_b[l] = delta.rowwise().sum();
      if (l > 0) {
        Eigen::MatrixXd back = weights_[l].transpose() * delta;
        delta = back.array() * (1.0 - activations[l].array().square());
      }
    }
    const Eigen::RowVectorXd residual = activations[layers].row(0) - y;
    return residual.squaredNorm() * inv_n;
  }

  double mse(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y) const {
    return (forward(x) - y).squaredNorm() / static_cast<double>(x.cols());
  }

private:
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  double best_val_loss = 0.0;
  int epochs_run = 0;
  bool early_stopped = false;
};

// Adaptive-moment mini-batch training. The data is split train/validation
// deterministically from the seed; the best-validation weights are restored
// at the end.
inline TrainReport train_mlp(Mlp& net, const Eigen::MatrixXd& x,
                             const Eigen::RowVectorXd& y, const TrainConfig& cfg,
                             std::uint64_t seed) {
  const Eigen::Index n = x.cols();
  if (n < 8) throw DomainError("train_mlp: need at least 8 samples");

  math::Rng shuffle_rng(seed ^ 0x112358ULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  // deterministic Fisher-Yates
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
    std::swap(order[i - 1], order[j]);
  }

  const Eigen::Index n_val =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(cfg.validation_fraction * n));
  const Eigen::Index n_train = n - n_val;
  Eigen::MatrixXd x_train(x.rows(), n_train), x_val(x.rows(), n_val);
  Eigen::RowVectorXd y_train(n_train), y_val(n_val);
  for (Eigen::Index i = 0; i < n_train; ++i) {
    x_train.col(i) = x.col(order[static_cast<std::size_t>(i)]);
    y_train(i) = y(order[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < n_val; ++i) {
    x_val.col(i) = x.col(order[static_cast<std::size_t>(n_train + i)]);
    y_val(i) = y(order[static_cast<std::size_t>(n_train + i)]);
  }

  // Adam state
  std::vector<Eigen::MatrixXd> m_w, v_w, grad_w;
  std::vector<Eigen::VectorXd> m_b, v_b, grad_b;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    m_w.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
    v_w.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
    m_b.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
    v_b.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double lr = cfg.learning_rate;
  long t = 0;

  TrainReport report;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Eigen::MatrixXd> best_w = net.weights();
  std::vector<Eigen::VectorXd> best_b = net.biases();
  int stall = 0;

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_train));
  std::iota(idx.begin(), idx.end(), 0);
  // step decay in the refinement phase of the budget
  const std::array<int, 4> lr_milestones = {
      cfg.epochs / 2, (cfg.epochs * 7) / 10, (cfg.epochs * 17) / 20,
      (cfg.epochs * 19) / 20};

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int milestone : lr_milestones)
      if (epoch == milestone && epoch > 0) lr *= cfg.lr_decay;
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
      std::swap(idx[i - 1], idx[j]);
    }
    double epoch_loss = 0.0;
    Eigen::Index done = 0;
    while (done < n_train) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n_train - done);
      Eigen::MatrixXd xb(x.rows(), b);
      Eigen::RowVectorXd yb(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        xb.col(i) = x_train.col(idx[static_cast<std::size_t>(done + i)]);
        yb(i) = y_train(idx[static_cast<std::size_t>(done + i)]);
      }
      const double loss = net.loss_and_gradients(xb, yb, grad_w, grad_b);
      if (!std::isfinite(loss)) throw NumericError("train_mlp: NaN loss");
      epoch_loss += loss * static_cast<double>(b);
      ++t;
      const double corr = std::sqrt(1.0 - std::pow(beta2, t)) / (1.0 - std::pow(beta1, t));
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        m_w[l] = beta1 * m_w[l] + (1.0 - beta1) * grad_w[l];
        v_w[l] = beta2 * v_w[l] + (1.0 - beta2) * grad_w[l].array().square().matrix();
        net.weights()[l].array() -=
            lr * corr * m_w[l].array() / (v_w[l].array().sqrt() + eps);
        m_b[l] = beta1 * m_b[l] + (1.0 - beta1) * grad_b[l];
        v_b[l] = beta2 * v_b[l] + (1.0 - beta2) * grad_b[l].array().square().matrix();
        net.biases()[l].array() -=
            lr * corr * m_b[l].array() / (v_b[l].array().sqrt() + eps);
      }
      done += b;
    }
    const double val = net.mse(x_val, y_val);
    report.train_loss.push_back(epoch_loss / static_cast<double>(n_train));
    report.val_loss.push_back(val);
    report.epochs_run = epoch + 1;

    if (val < best_val * (1.0 - 1e-5)) {
      best_val = val;
      best_w = net.weights();
      best_b = net.biases();
      stall = 0;
    } else {
      ++stall;
      if (stall == cfg.patience / 2) lr *= cfg.lr_decay;
      if (stall >= cfg.patience) {
        report.early_stopped = true;
        break;
      }
    }
  }
  net.weights() = best_w;
  net.biases() = best_b;
  report.best_val_loss = best_val;
  return report;
}

}  // namespace spotvol::surrogate
