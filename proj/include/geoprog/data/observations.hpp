#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geoprog/fitness/metric.hpp"
#include "geoprog/primitives/input.hpp"
#include "geoprog/primitives/raster.hpp"

namespace geoprog {

/// Observation dataset: program inputs paired with scalar targets. All rasters
/// share one (width, height). Copies share the mask provider.
struct ObservationSet {
  std::vector<InputDescriptor> inputs;
  std::vector<double> targets;
  std::string target_name;
  MetricId metric = MetricId::L2_LOG;
  std::vector<std::string> vocabulary;
  std::size_t width = 0;
  std::size_t height = 0;
  std::shared_ptr<const MaskProvider> masks;
  std::filesystem::path manifest_path;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }

  /// Observations with the given ids, in the order given. Throws
  /// std::out_of_range for unknown ids.
  ObservationSet subset(std::span<const std::string> ids) const;
  ObservationSet subset_indices(std::span<const std::size_t> indices) const;
  std::vector<std::string> ids() const;

  /// Throws SchemaError when ids repeat, targets are non-finite, or
  /// coordinates are out of range.
  void validate() const;
};

}  // namespace geoprog
