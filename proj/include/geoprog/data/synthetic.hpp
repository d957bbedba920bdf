#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoprog/data/observations.hpp"
#include "geoprog/dsl/ast.hpp"
#include "geoprog/primitives/registry.hpp"

namespace geoprog {

/// Parameters of the procedural climate attached to every synthetic tile.
struct SyntheticClimate {
  double lon_min = -120.0;
  double lon_max = -70.0;
  double lat_min = 25.0;
  double lat_max = 49.0;
  double sea_level_temperature = 30.0;  // deg C at the equator
  double temperature_per_degree_latitude = 0.5;
  double lapse_rate = 0.0065;  // deg C per metre
  double precipitation_base = 300.0;
  double precipitation_per_degree_longitude = 20.0;
  double precipitation_per_forest = 600.0;
  double nightlight_per_built = 60.0;
};

/// Temperature lapse model used by the generator.
double synthetic_temperature(const SyntheticClimate& climate, double latitude, double elevation);

/// Land-cover concepts painted by the generator, in channel order. "road" is
/// a separate line layer; the others are mutually exclusive per cell, and
/// cells covered by none of them are bare ground.
const std::vector<std::string>& synthetic_vocabulary();
/// The land-cover subset of synthetic_vocabulary() (everything except road).
const std::vector<std::string>& synthetic_landuse_categories();

struct SyntheticWorldSpec {
  std::uint64_t seed = 7;
  std::size_t n_obs = 1000;
  std::size_t tile_size = 64;
  std::string hidden_source;
  /// Fixed linear head applied to the hidden program's features. Empty
  /// weights mean 1.0 per feature.
  std::vector<double> head_weights;
  double head_bias = 0.0;
  double noise_sigma = 0.01;
  std::string target_name = "synthetic target";
  MetricId metric = MetricId::RMSE;
  SyntheticClimate climate;
};

/// Named presets accepted by gen-data: "density-synthetic",
/// "poverty-synthetic", "agb-synthetic". Throws ConfigError.
SyntheticWorldSpec synthetic_preset(const std::string& name, std::uint64_t seed, std::size_t n_obs);
std::vector<std::string> synthetic_preset_names();

/// Generates rasters, coordinates, scalar fields and targets; deterministic in
/// the spec. Throws InvalidHiddenProgram when the hidden program does not
/// typecheck, fails on a tile, or disagrees with the head dimension.
ObservationSet generate_synthetic_world(const SyntheticWorldSpec& spec,
                                        const PrimitiveRegistry& registry = default_registry());

ObservationSet generate_synthetic_world(std::uint64_t seed, std::size_t n_obs, std::size_t tile_size,
                                        const FeatureProgram& hidden_program, double noise_sigma);

}  // namespace geoprog
