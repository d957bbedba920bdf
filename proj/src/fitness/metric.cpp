#include "geoprog/fitness/metric.hpp"

#include <algorithm>
#include <cmath>

#include "geoprog/error.hpp"

namespace geoprog {

std::string_view metric_name(MetricId id) {
  switch (id) {
    case MetricId::L2_LOG: return "L2_LOG";
    case MetricId::L1_LOG: return "L1_LOG";
    case MetricId::L1: return "L1";
    case MetricId::RMSE: return "RMSE";
  }
  return "?";
}

MetricId parse_metric(std::string_view name) {
  for (auto id : all_metrics())
    if (metric_name(id) == name) return id;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

const std::vector<MetricId>& all_metrics() {
  static const std::vector<MetricId> ids{MetricId::L2_LOG, MetricId::L1_LOG, MetricId::L1, MetricId::RMSE};
  return ids;
}

double Metric::loss(double predicted, double target) const {
  switch (id) {
    case MetricId::L2_LOG: {
      const double d = std::log(std::max(predicted, epsilon)) - std::log(std::max(target, epsilon));
      return d * d;
    }
    case MetricId::L1_LOG:
      return std::abs(std::log(std::max(predicted, epsilon)) - std::log(std::max(target, epsilon)));
    case MetricId::L1: return std::abs(predicted - target);
    case MetricId::RMSE: {
      const double d = predicted - target;
      return d * d;
    }
  }
  return 0.0;
}

double Metric::aggregate(std::span<const double> losses) const {
  if (losses.empty()) throw EmptySubset("cannot score an empty observation subset");
  double sum = 0.0;
  for (double l : losses) sum += l;
  const double mean = sum / static_cast<double>(losses.size());
  return id == MetricId::RMSE ? std::sqrt(mean) : mean;
}

double Metric::score(std::span<const double> predicted, std::span<const double> targets) const {
  std::vector<double> losses(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) losses[i] = loss(predicted[i], targets[i]);
  return aggregate(losses);
}

double Metric::recompose(std::span<const double> stratum_scores, std::span<const std::size_t> sizes) const {
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < stratum_scores.size(); ++i) {
    if (sizes[i] == 0) continue;
    const double s = stratum_scores[i];
    total += static_cast<double>(sizes[i]) * (id == MetricId::RMSE ? s * s : s);
    n += sizes[i];
  }
  if (n == 0) throw EmptySubset("all strata are empty");
  const double mean = total / static_cast<double>(n);
  return id == MetricId::RMSE ? std::sqrt(mean) : mean;
}

}  // namespace geoprog
