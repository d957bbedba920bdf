#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geoprog {

enum class MetricId { L2_LOG, L1_LOG, L1, RMSE };

std::string_view metric_name(MetricId id);
/// Throws ConfigError on unknown names.
MetricId parse_metric(std::string_view name);
const std::vector<MetricId>& all_metrics();

/// Evaluation metric; lower is better for every id.
struct Metric {
  MetricId id = MetricId::L2_LOG;
  /// Guard for the log metrics: values are clamped to >= epsilon before the log.
  double epsilon = 1e-6;

  bool is_log() const { return id == MetricId::L2_LOG || id == MetricId::L1_LOG; }

  /// Loss contribution of one observation. For RMSE this is the squared error.
  double loss(double predicted, double target) const;

  /// Aggregates per-observation losses into a score (mean, or root-mean for RMSE).
  /// Throws EmptySubset.
  double aggregate(std::span<const double> losses) const;

  /// score over paired predictions and targets.
  double score(std::span<const double> predicted, std::span<const double> targets) const;

  /// Combines per-stratum scores of disjoint strata with the given sizes back
  /// into the score of their union.
  double recompose(std::span<const double> stratum_scores, std::span<const std::size_t> sizes) const;
};

}  // namespace geoprog
