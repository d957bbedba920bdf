#pragma once

#include <map>
#include <string>

namespace geoprog {

/// The program input for one observation: location, a reference to its
/// concept raster, and auxiliary scalar measurements.
struct InputDescriptor {
  std::string id;
  double longitude = 0.0;  // degrees, [-180, 180]
  double latitude = 0.0;   // degrees, [-90, 90]
  std::string raster_ref;
  std::map<std::string, double> scalar_fields;

  bool operator==(const InputDescriptor&) const = default;
};

}  // namespace geoprog
