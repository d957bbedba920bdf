#include "geoprog/fitness/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "geoprog/error.hpp"

namespace geoprog {

double RegressionHead::linear(std::span<const double> features) const {
  double y = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (!constant[j]) y += weights[j] * (features[j] - feature_means[j]) / feature_stds[j];
  return y;
}

double RegressionHead::predict(std::span<const double> features) const {
  const double y = linear(features);
  return log_target ? std::exp(y) : y;
}

std::vector<double> RegressionHead::raw_weights() const {
  std::vector<double> out(weights.size(), 0.0);
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (!constant[j]) out[j] = weights[j] / feature_stds[j];
  return out;
}

double RegressionHead::raw_intercept() const {
  double b = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (!constant[j]) b -= weights[j] * feature_means[j] / feature_stds[j];
  return b;
}

RegressionHead fit_head(std::span<const std::vector<double>> features, std::span<const double> targets,
                        std::vector<std::string> feature_names, const Metric& metric, const RidgeOptions& options) {
  const std::size_t n = features.size();
  if (n < 2) throw DegenerateFit("need at least 2 usable rows to fit, got " + std::to_string(n));
  const std::size_t p = feature_names.size();

  RegressionHead head;
  head.feature_names = std::move(feature_names);
  head.log_target = metric.is_log();
  head.epsilon = metric.epsilon;
  head.weights.assign(p, 0.0);
  head.feature_means.assign(p, 0.0);
  head.feature_stds.assign(p, 1.0);
  head.constant.assign(p, false);

  Eigen::VectorXd t(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    t[static_cast<Eigen::Index>(i)] = head.log_target ? std::log(std::max(targets[i], metric.epsilon)) : targets[i];
  head.intercept = t.mean();

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (const auto& row : features) mean += row[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& row : features) var += (row[j] - mean) * (row[j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    head.feature_means[j] = mean;
    if (!(sd > options.constant_tolerance * std::max(1.0, std::abs(mean)))) {
      head.constant[j] = true;
      continue;
    }
    head.feature_stds[j] = sd;
    active.push_back(j);
  }
  if (active.empty()) return head;

  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), k);
  for (std::size_t i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c) {
      const std::size_t j = active[static_cast<std::size_t>(c)];
      z(static_cast<Eigen::Index>(i), c) = (features[i][j] - head.feature_means[j]) / head.feature_stds[j];
    }
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd gram = (z.transpose() * z) * inv_n;
  const Eigen::VectorXd rhs = z.transpose() * (t.array() - head.intercept).matrix() * inv_n;
  const Eigen::MatrixXd damped = gram + options.lambda * Eigen::MatrixXd::Identity(k, k);
  const Eigen::LDLT<Eigen::MatrixXd> solver(damped);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
  for (int round = 0; round <= options.refinements; ++round) w += solver.solve(rhs - gram * w);
  for (Eigen::Index c = 0; c < k; ++c) head.weights[active[static_cast<std::size_t>(c)]] = w[c];
  return head;
}

}  // namespace geoprog
