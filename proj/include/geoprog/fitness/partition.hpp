#pragma once

#include <map>
#include <string>
#include <vector>

namespace geoprog {

/// Disjoint strata covering a set of observations.
struct Partition {
  enum class Scheme { DominantConcept, Custom };

  Scheme scheme = Scheme::Custom;
  /// Stratum names in reporting order.
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::string>> strata;

  /// Throws SchemaError unless the strata are disjoint and cover exactly `ids`.
  void check_covers(const std::vector<std::string>& ids) const;
};

}  // namespace geoprog
