#pragma once

#include <span>
#include <string>
#include <vector>

#include "geoprog/fitness/metric.hpp"

namespace geoprog {

struct RidgeOptions {
  double lambda = 1e-6;
  /// Rounds of iterated Tikhonov refinement; each round shrinks the ridge
  /// bias on well-conditioned directions by a factor of about lambda.
  int refinements = 4;
  /// A column whose spread is below this (relative to its magnitude) is
  /// treated as constant.
  double constant_tolerance = 1e-12;
};

/// Linear head over standardized features. When `log_target` is set the head
/// predicts log(max(y, epsilon)) and predictions are exponentiated.
struct RegressionHead {
  std::vector<std::string> feature_names;
  std::vector<double> weights;  // standardized
  double intercept = 0.0;       // standardized
  std::vector<double> feature_means;
  std::vector<double> feature_stds;
  std::vector<bool> constant;  // columns held at weight 0
  bool log_target = false;
  double epsilon = 1e-6;

  std::size_t size() const { return weights.size(); }
  double linear(std::span<const double> features) const;
  double predict(std::span<const double> features) const;
  /// Weights and intercept on the original feature scale.
  std::vector<double> raw_weights() const;
  double raw_intercept() const;
};

/// Fits on the rows of `features` (row-major, one vector per observation).
/// Throws DegenerateFit when fewer than two rows are given.
RegressionHead fit_head(std::span<const std::vector<double>> features, std::span<const double> targets,
                        std::vector<std::string> feature_names, const Metric& metric, const RidgeOptions& options = {});

}  // namespace geoprog
