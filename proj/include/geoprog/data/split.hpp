#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoprog/data/observations.hpp"

namespace geoprog {

/// Geographic split: the westernmost third is held out as out-of-distribution,
/// the rest is shuffled into train and test.
struct SplitSpec {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> ood_ids;
};

/// Observations are ordered by (longitude, id); the first floor(n/3) are OOD.
/// The remaining ones are shuffled with `seed` and the first
/// round(train_ratio * n_east) become train (at least one each of train and
/// test when n_east >= 2). Throws TooFewObservations when n < 3.
SplitSpec split_by_longitude(const ObservationSet& obs, double train_ratio_within_east = 0.8,
                             std::uint64_t seed = 0);

}  // namespace geoprog
