#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "learning.hpp"

namespace tcinf {

struct LogisticParams {
  double learning_rate = 0.1;
  std::size_t epochs = 1000;
  double l2 = 1e-4;
  bool standardize = true;
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Mean log-loss plus (l2 / 2) * |w|^2 over a dense design matrix. Parameters
/// are the weights followed by the bias; the bias is not regularized.
class LogisticObjective {
public:
  LogisticObjective(std::vector<double> x, std::vector<double> y, std::size_t dims, double l2)
      : x_(std::move(x)), y_(std::move(y)), dims_(dims), l2_(l2) {}

  std::size_t dims() const noexcept { return dims_; }
  std::size_t rows() const noexcept { return y_.size(); }

  double loss(std::span<const double> params) const {
    double total = 0;
    for (std::size_t i = 0; i < rows(); ++i) {
      const double z = margin(params, i);
      // log(1 + e^z) - y z, written to stay finite for large |z|
      total += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y_[i] * z;
    }
    double reg = 0;
    for (std::size_t j = 0; j < dims_; ++j) reg += params[j] * params[j];
    return total / static_cast<double>(rows()) + 0.5 * l2_ * reg;
  }

  std::vector<double> gradient(std::span<const double> params) const {
    std::vector<double> g(dims_ + 1, 0.0);
    for (std::size_t i = 0; i < rows(); ++i) {
      const double r = sigmoid(margin(params, i)) - y_[i];
      const double* xi = x_.data() + i * dims_;
      for (std::size_t j = 0; j < dims_; ++j) g[j] += r * xi[j];
      g[dims_] += r;
    }
    const double n = static_cast<double>(rows());
    for (std::size_t j = 0; j < dims_; ++j) g[j] = g[j] / n + l2_ * params[j];
    g[dims_] /= n;
    return g;
  }

private:
  double margin(std::span<const double> params, std::size_t i) const {
    const double* xi = x_.data() + i * dims_;
    double z = params[dims_];
    for (std::size_t j = 0; j < dims_; ++j) z += params[j] * xi[j];
    return z;
  }

  std::vector<double> x_, y_;
  std::size_t dims_;
  double l2_;
};

struct LogisticModel {
  static constexpr int kSchemaVersion = 1;

  std::size_t n_features = 0;
  // Input columns kept for the fit; constant columns are dropped.
  std::vector<std::size_t> kept;
  std::vector<double> mean, scale;
  std::vector<double> weights;
  double bias = 0;
  std::vector<double> loss_history;

  double predict_probability(std::span<const double> row) const {
    double z = bias;
    for (std::size_t k = 0; k < kept.size(); ++k) z += weights[k] * (row[kept[k]] - mean[k]) / scale[k];
    return sigmoid(z);
  }
};

/// Full-batch gradient descent from zero weights.
inline LogisticModel train_logistic(const LabeledMatrix& train, const LogisticParams& params = {}) {
  if (train.empty()) throw DegenerateDataError("empty training set");
  if (!train.has_both_classes()) throw DegenerateDataError("training set holds a single class");
  if (!(params.learning_rate > 0) || params.l2 < 0) throw ConfigError("invalid logistic hyperparameters");

  const std::size_t n = train.rows(), d = train.cols();
  LogisticModel model;
  model.n_features = d;
  for (std::size_t j = 0; j < d; ++j) {
    double mu = 0;
    for (std::size_t i = 0; i < n; ++i) mu += train.row(i)[j];
    mu /= static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (train.row(i)[j] - mu) * (train.row(i)[j] - mu);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (!(sd > 0)) continue;
    model.kept.push_back(j);
    model.mean.push_back(params.standardize ? mu : 0.0);
    model.scale.push_back(params.standardize ? sd : 1.0);
  }

  const std::size_t k = model.kept.size();
  std::vector<double> x(n * k), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) x[i * k + c] = (train.row(i)[model.kept[c]] - model.mean[c]) / model.scale[c];
    y[i] = train.label(i) == Label::Positive ? 1.0 : 0.0;
  }
  const LogisticObjective objective(std::move(x), std::move(y), k, params.l2);

  std::vector<double> theta(k + 1, 0.0);
  model.loss_history.reserve(params.epochs + 1);
  model.loss_history.push_back(objective.loss(theta));
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const auto g = objective.gradient(theta);
    for (std::size_t j = 0; j <= k; ++j) theta[j] -= params.learning_rate * g[j];
    model.loss_history.push_back(objective.loss(theta));
  }
  model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(k));
  model.bias = theta[k];
  return model;
}

inline nlohmann::json to_json(const LogisticModel& m) {
  return {{"schema", "tcinf.logistic"},
          {"version", LogisticModel::kSchemaVersion},
          {"n_features", m.n_features},
          {"kept", m.kept},
          {"mean", m.mean},
          {"scale", m.scale},
          {"weights", m.weights},
          {"bias", m.bias}};
}

inline LogisticModel logistic_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "tcinf.logistic" || j.value("version", 0) != LogisticModel::kSchemaVersion)
    throw ConfigError("not a version 1 logistic model");
  LogisticModel m;
  j.at("n_features").get_to(m.n_features);
  j.at("kept").get_to(m.kept);
  j.at("mean").get_to(m.mean);
  j.at("scale").get_to(m.scale);
  j.at("weights").get_to(m.weights);
  j.at("bias").get_to(m.bias);
  if (m.mean.size() != m.kept.size() || m.scale.size() != m.kept.size() || m.weights.size() != m.kept.size())
    throw ConfigError("logistic model arrays differ in length");
  return m;
}

} // namespace tcinf
