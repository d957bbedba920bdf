#include "geoprog/data/observations.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "geoprog/error.hpp"

namespace geoprog {

ObservationSet ObservationSet::subset_indices(std::span<const std::size_t> indices) const {
  ObservationSet out;
  out.target_name = target_name;
  out.metric = metric;
  out.vocabulary = vocabulary;
  out.width = width;
  out.height = height;
  out.masks = masks;
  out.manifest_path = manifest_path;
  out.inputs.reserve(indices.size());
  out.targets.reserve(indices.size());
  for (auto i : indices) {
    out.inputs.push_back(inputs.at(i));
    out.targets.push_back(targets.at(i));
  }
  return out;
}

ObservationSet ObservationSet::subset(std::span<const std::string> ids) const {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < inputs.size(); ++i) index.emplace(inputs[i].id, i);
  std::vector<std::size_t> picked;
  picked.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw std::out_of_range("no observation with id " + id);
    picked.push_back(it->second);
  }
  return subset_indices(picked);
}

std::vector<std::string> ObservationSet::ids() const {
  std::vector<std::string> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(in.id);
  return out;
}

void ObservationSet::validate() const {
  if (inputs.size() != targets.size()) throw SchemaError("inputs and targets differ in length");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& in = inputs[i];
    if (!seen.insert(in.id).second) throw SchemaError("duplicate observation id " + in.id);
    if (!std::isfinite(targets[i])) throw SchemaError("non-finite target for " + in.id);
    if (!(in.longitude >= -180.0 && in.longitude <= 180.0)) throw SchemaError("longitude out of range for " + in.id);
    if (!(in.latitude >= -90.0 && in.latitude <= 90.0)) throw SchemaError("latitude out of range for " + in.id);
  }
}

}  // namespace geoprog
