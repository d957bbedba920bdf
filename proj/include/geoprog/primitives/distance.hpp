#pragma once

#include "geoprog/primitives/registry.hpp"
#include "geoprog/primitives/value.hpp"

namespace geoprog {

/// Distance, in cell units, from each cell to the nearest 1-cell of `mask`.
/// Euclidean distances are exact (separable squared-distance transform).
/// A mask with no 1-cells yields a grid filled with width + height.
Grid distance_transform(const Mask& mask, DistanceMetric metric = DistanceMetric::Euclidean);

}  // namespace geoprog
