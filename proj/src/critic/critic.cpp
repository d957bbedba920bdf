#include "geoprog/critic/critic.hpp"

#include <algorithm>
#include <cmath>

#include "geoprog/error.hpp"
#include "geoprog/llm/extract.hpp"

namespace geoprog {

Partition partition_by_landuse(const ObservationSet& obs, const std::vector<std::string>& categories) {
  for (const auto& c : categories)
    if (std::find(obs.vocabulary.begin(), obs.vocabulary.end(), c) == obs.vocabulary.end())
      throw UnknownCategory("category '" + c + "' is not in the dataset vocabulary");
  if (!obs.masks) throw SchemaError("observation set has no raster provider");

  Partition p;
  p.scheme = Partition::Scheme::DominantConcept;
  p.names = categories;
  p.names.emplace_back(kOtherStratum);
  for (const auto& name : p.names) p.strata[name];
  for (const auto& in : obs.inputs) {
    const Raster& raster = obs.masks->raster(in);
    std::size_t best_count = 0;
    const std::string* best = nullptr;
    for (const auto& c : categories) {
      const int index = raster.channel_index(c);
      if (index < 0) throw UnknownCategory("raster of " + in.id + " has no channel '" + c + "'");
      const auto& cells = raster.channels[static_cast<std::size_t>(index)];
      const auto count = static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](auto v) { return v != 0; }));
      if (count > best_count) {
        best_count = count;
        best = &c;
      }
    }
    p.strata[best ? *best : std::string(kOtherStratum)].push_back(in.id);
  }
  return p;
}

std::vector<StratumReport> rank_strata(const std::map<std::string, double>& strata_scores, const Partition& partition) {
  std::vector<StratumReport> out;
  for (const auto& name : partition.names) {
    auto it = strata_scores.find(name);
    auto members = partition.strata.find(name);
    if (it == strata_scores.end() || members == partition.strata.end() || members->second.empty()) continue;
    if (!std::isfinite(it->second)) continue;
    out.push_back({name, it->second, members->second.size()});
  }
  std::stable_sort(out.begin(), out.end(), [](const StratumReport& a, const StratumReport& b) { return a.score > b.score; });
  return out;
}

Candidate critique(const Candidate& candidate, const FitnessContext& ctx, const Partition& partition,
                   const PromptBundle& bundle, LlmBackend& backend, const CriticOptions& options,
                   std::vector<Exchange>* exchanges) {
  if (!candidate.valid) return candidate;
  Candidate original = candidate;
  if (original.strata_scores.empty())
    original.strata_scores = stratified_score(original, *ctx.train, partition, ctx);
  const auto ranked = rank_strata(original.strata_scores, partition);
  const std::string prompt = build_critic_prompt(original, ranked, options.worst_k, bundle);

  RequestOptions request{options.attempts, options.sampling, "critic", options.tag};
  Candidate revised;
  try {
    FeatureProgram program = request_program(backend, prompt, *ctx.registry, request, exchanges);
    auto provenance = original.provenance;
    provenance.push_back("critic-accepted");
    revised = fit_candidate(std::move(program), ctx, std::move(provenance));
  } catch (const LlmError&) {
    revised.valid = false;
  }
  if (revised.valid && revised.score_train < original.score_train) {
    revised.id = original.id;
    revised.generation = original.generation;
    revised.strata_scores = stratified_score(revised, *ctx.train, partition, ctx);
    return revised;
  }
  original.provenance.push_back("critic-rejected");
  return original;
}

}  // namespace geoprog
