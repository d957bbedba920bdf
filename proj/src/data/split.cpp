#include "geoprog/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geoprog/error.hpp"
#include "geoprog/util/rng.hpp"

namespace geoprog {

SplitSpec split_by_longitude(const ObservationSet& obs, double train_ratio_within_east, std::uint64_t seed) {
  const std::size_t n = obs.size();
  if (n < 3) throw TooFewObservations("a longitude split needs at least 3 observations, got " + std::to_string(n));
  if (!(train_ratio_within_east >= 0.0 && train_ratio_within_east <= 1.0))
    throw ConfigError("train ratio must lie in [0, 1]");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ia = obs.inputs[a];
    const auto& ib = obs.inputs[b];
    if (ia.longitude != ib.longitude) return ia.longitude < ib.longitude;
    return ia.id < ib.id;
  });

  SplitSpec split;
  const std::size_t n_ood = n / 3;
  for (std::size_t i = 0; i < n_ood; ++i) split.ood_ids.push_back(obs.inputs[order[i]].id);

  std::vector<std::size_t> east(order.begin() + static_cast<std::ptrdiff_t>(n_ood), order.end());
  Rng rng(derive_seed(seed, {0x73706c6974}));
  for (std::size_t i = east.size(); i > 1; --i) std::swap(east[i - 1], east[uniform_index(rng, i)]);

  auto n_train = static_cast<std::size_t>(std::llround(train_ratio_within_east * static_cast<double>(east.size())));
  if (east.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, east.size() - 1);
  for (std::size_t i = 0; i < east.size(); ++i)
    (i < n_train ? split.train_ids : split.test_ids).push_back(obs.inputs[east[i]].id);
  return split;
}

}  // namespace geoprog
