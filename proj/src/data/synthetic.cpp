#include "geoprog/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>

#include "geoprog/dsl/evaluator.hpp"
#include "geoprog/dsl/parser.hpp"
#include "geoprog/dsl/printer.hpp"
#include "geoprog/error.hpp"
#include "geoprog/util/rng.hpp"

namespace geoprog {

namespace {

const char* const kDensityHidden = R"(def f(loc):
    res = area_fraction(mask(loc, "residential"))
    road = log1p(mean(distance_transform(mask(loc, "road"))))
    return [("density", 2.0 * res + 0.7 * road)]
)";

const char* const kPovertyHidden = R"(def f(loc):
    farm = area_fraction(mask(loc, "farmland"))
    shops = area_fraction(mask(loc, "commercial"))
    road = log1p(mean(distance_transform(mask(loc, "road"))))
    return [("poverty", 0.5 + 1.5 * farm - 0.8 * shops + 0.3 * road)]
)";

const char* const kAgbHidden = R"(def f(loc):
    forest = area_fraction(mask(loc, "forest"))
    rain = precipitation(loc)
    return [("forest", forest), ("rain", rain)]
)";

struct Blob {
  double cx, cy, radius;
  std::uint8_t label;
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::array<double, 9> class_weights(double urban, double lat_norm) {
  // Order matches synthetic_landuse_categories().
  return {0.2 + 1.6 * urban,
          0.1 + 0.6 * urban,
          0.05 + 0.4 * urban,
          1.2 * (1.0 - urban),
          (1.0 - urban) * (0.4 + 0.8 * lat_norm),
          0.5 * (1.0 - urban),
          0.25,
          0.1,
          0.15 + 0.2 * urban};
}

struct Tile {
  std::shared_ptr<Raster> raster;
  InputDescriptor input;
};

Tile make_tile(const SyntheticWorldSpec& spec, std::size_t index) {
  const auto& c = spec.climate;
  const std::size_t n = spec.tile_size;
  Rng rng(derive_seed(spec.seed, {0x7469, index}));
  std::normal_distribution<double> gauss(0.0, 1.0);

  Tile tile;
  char id[32];
  std::snprintf(id, sizeof id, "obs-%05zu", index);
  tile.input.id = id;
  tile.input.longitude = c.lon_min + (c.lon_max - c.lon_min) * uniform01(rng);
  tile.input.latitude = c.lat_min + (c.lat_max - c.lat_min) * uniform01(rng);
  tile.input.raster_ref = "rasters/" + tile.input.id + ".dgrd";
  const double lon = tile.input.longitude;
  const double lat = tile.input.latitude;
  const double lat_norm = (lat - c.lat_min) / std::max(c.lat_max - c.lat_min, 1e-9);

  const double urban = clamp01(0.45 + 0.3 * std::sin(0.13 * lon + 0.7) * std::cos(0.21 * lat) + 0.18 * gauss(rng));
  const auto weights = class_weights(urban, lat_norm);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());

  std::vector<std::uint8_t> labels(n * n, 0);
  const int blobs = 3 + static_cast<int>(uniform_index(rng, 10));
  const double max_radius = std::max(2.0, static_cast<double>(n) / 4.0);
  for (int b = 0; b < blobs; ++b) {
    Blob blob{uniform01(rng) * n, uniform01(rng) * n, 2.0 + (max_radius - 2.0) * uniform01(rng),
              static_cast<std::uint8_t>(pick(rng) + 1)};
    const double r2 = blob.radius * blob.radius;
    for (std::size_t y = 0; y < n; ++y) {
      const double dy = static_cast<double>(y) + 0.5 - blob.cy;
      for (std::size_t x = 0; x < n; ++x) {
        const double dx = static_cast<double>(x) + 0.5 - blob.cx;
        if (dx * dx + dy * dy <= r2) labels[y * n + x] = blob.label;
      }
    }
  }

  std::vector<std::uint8_t> road(n * n, 0);
  std::poisson_distribution<int> road_count(0.3 + 3.0 * urban);
  const int roads = road_count(rng);
  for (int r = 0; r < roads; ++r) {
    const double px = uniform01(rng) * n, py = uniform01(rng) * n;
    const double theta = std::numbers::pi * uniform01(rng);
    const double half_width = 0.5 + 0.5 * uniform01(rng);
    const double s = std::sin(theta), co = std::cos(theta);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        const double d = (static_cast<double>(x) + 0.5 - px) * s - (static_cast<double>(y) + 0.5 - py) * co;
        if (std::abs(d) <= half_width) road[y * n + x] = 1;
      }
  }

  auto raster = std::make_shared<Raster>();
  raster->width = n;
  raster->height = n;
  const auto& landuse = synthetic_landuse_categories();
  std::vector<double> fraction(landuse.size() + 1, 0.0);
  for (auto l : labels) fraction[l] += 1.0;
  for (auto& f : fraction) f /= static_cast<double>(n * n);
  for (const auto& name : synthetic_vocabulary()) {
    raster->channel_names.push_back(name);
    if (name == "road") {
      raster->channels.push_back(road);
      continue;
    }
    const auto label = static_cast<std::uint8_t>(std::find(landuse.begin(), landuse.end(), name) - landuse.begin() + 1);
    std::vector<std::uint8_t> channel(n * n);
    for (std::size_t i = 0; i < labels.size(); ++i) channel[i] = labels[i] == label ? 1 : 0;
    raster->channels.push_back(std::move(channel));
  }
  tile.raster = raster;

  auto frac = [&](std::string_view name) {
    return fraction[std::find(landuse.begin(), landuse.end(), name) - landuse.begin() + 1];
  };
  const double elevation =
      std::max(0.0, 200.0 + 800.0 * (0.5 + 0.5 * std::sin(0.09 * lon) * std::cos(0.17 * lat)) + 50.0 * gauss(rng));
  const double precipitation = std::max(0.0, c.precipitation_base + c.precipitation_per_degree_longitude * (lon - c.lon_min) +
                                                 c.precipitation_per_forest * frac("forest") + 20.0 * gauss(rng));
  const double built = frac("residential") + frac("commercial") + frac("industrial");
  const double nightlight = std::max(0.0, c.nightlight_per_built * built + gauss(rng));
  tile.input.scalar_fields = {{"elevation", elevation},
                              {"nightlight", nightlight},
                              {"precipitation", precipitation},
                              {"temperature", synthetic_temperature(c, lat, elevation)}};
  return tile;
}

}  // namespace

double synthetic_temperature(const SyntheticClimate& climate, double latitude, double elevation) {
  return climate.sea_level_temperature - climate.temperature_per_degree_latitude * std::abs(latitude) -
         climate.lapse_rate * elevation;
}

const std::vector<std::string>& synthetic_vocabulary() {
  static const std::vector<std::string> names{"residential", "commercial", "industrial", "road",    "farmland",
                                              "forest",      "grassland",  "water",      "wetland", "park"};
  return names;
}

const std::vector<std::string>& synthetic_landuse_categories() {
  static const std::vector<std::string> names{"residential", "commercial", "industrial", "farmland", "forest",
                                              "grassland",   "water",      "wetland",    "park"};
  return names;
}

std::vector<std::string> synthetic_preset_names() {
  return {"density-synthetic", "poverty-synthetic", "agb-synthetic"};
}

SyntheticWorldSpec synthetic_preset(const std::string& name, std::uint64_t seed, std::size_t n_obs) {
  SyntheticWorldSpec spec;
  spec.seed = seed;
  spec.n_obs = n_obs;
  if (name == "density-synthetic") {
    spec.hidden_source = kDensityHidden;
    spec.target_name = "population density";
    spec.metric = MetricId::RMSE;
  } else if (name == "poverty-synthetic") {
    spec.hidden_source = kPovertyHidden;
    spec.target_name = "poverty rate";
    spec.metric = MetricId::L1;
  } else if (name == "agb-synthetic") {
    spec.hidden_source = kAgbHidden;
    spec.head_weights = {50.0, 0.02};
    spec.head_bias = 5.0;
    spec.target_name = "above-ground biomass";
    spec.metric = MetricId::L2_LOG;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return spec;
}

ObservationSet generate_synthetic_world(const SyntheticWorldSpec& spec, const PrimitiveRegistry& registry) {
  if (spec.n_obs < 10) throw InvalidHiddenProgram("a synthetic world needs at least 10 observations");
  if (spec.tile_size == 0) throw InvalidHiddenProgram("tile size must be positive");

  std::unique_ptr<CompiledProgram> hidden;
  try {
    hidden = std::make_unique<CompiledProgram>(parse(spec.hidden_source, registry), registry);
  } catch (const Error& e) {
    throw InvalidHiddenProgram(std::string("hidden program rejected: ") + e.what());
  }
  std::vector<double> head = spec.head_weights;
  if (head.empty()) head.assign(hidden->feature_count(), 1.0);
  if (head.size() != hidden->feature_count())
    throw InvalidHiddenProgram("head has " + std::to_string(head.size()) + " weights but the hidden program returns " +
                               std::to_string(hidden->feature_count()) + " features");

  auto provider = std::make_shared<InMemoryMaskProvider>(synthetic_vocabulary());
  ObservationSet obs;
  obs.target_name = spec.target_name;
  obs.metric = spec.metric;
  obs.vocabulary = synthetic_vocabulary();
  obs.width = spec.tile_size;
  obs.height = spec.tile_size;
  obs.inputs.reserve(spec.n_obs);
  for (std::size_t i = 0; i < spec.n_obs; ++i) {
    Tile tile = make_tile(spec, i);
    provider->insert(tile.input.raster_ref, tile.raster);
    obs.inputs.push_back(std::move(tile.input));
  }
  obs.masks = provider;

  EvalEnv env;
  env.registry = &registry;
  env.masks = provider.get();
  env.limits.step_budget = std::numeric_limits<std::uint64_t>::max();
  env.limits.timeout = std::chrono::hours(1);
  Rng noise_rng(derive_seed(spec.seed, {0x6e6f697365}));
  std::normal_distribution<double> noise(0.0, 1.0);
  obs.targets.reserve(spec.n_obs);
  for (const auto& input : obs.inputs) {
    std::vector<double> features;
    try {
      features = hidden->evaluate(input, env);
    } catch (const Error& e) {
      throw InvalidHiddenProgram("hidden program failed on " + input.id + ": " + e.what());
    }
    double y = spec.head_bias;
    for (std::size_t k = 0; k < features.size(); ++k) y += head[k] * features[k];
    obs.targets.push_back(y + spec.noise_sigma * noise(noise_rng));
  }
  return obs;
}

ObservationSet generate_synthetic_world(std::uint64_t seed, std::size_t n_obs, std::size_t tile_size,
                                        const FeatureProgram& hidden_program, double noise_sigma) {
  SyntheticWorldSpec spec;
  spec.seed = seed;
  spec.n_obs = n_obs;
  spec.tile_size = tile_size;
  spec.hidden_source = pretty_print(hidden_program);
  spec.noise_sigma = noise_sigma;
  return generate_synthetic_world(spec);
}

}  // namespace geoprog
