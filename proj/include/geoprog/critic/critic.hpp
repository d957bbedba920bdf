#pragma once

#include <string>
#include <vector>

#include "geoprog/fitness/candidate.hpp"
#include "geoprog/llm/backend.hpp"
#include "geoprog/llm/prompts.hpp"

namespace geoprog {

inline constexpr std::string_view kOtherStratum = "other";

/// Assigns each observation to the category with the largest area fraction
/// in its raster (earlier categories win ties); observations where every
/// category is absent go to "other". Throws UnknownCategory.
Partition partition_by_landuse(const ObservationSet& obs, const std::vector<std::string>& categories);

/// Non-empty strata ordered worst (largest score) first; ties keep the
/// partition's name order.
std::vector<StratumReport> rank_strata(const std::map<std::string, double>& strata_scores, const Partition& partition);

struct CriticOptions {
  std::size_t worst_k = 2;
  Sampling sampling{0.2, 1024, 0};
  int attempts = 3;
  std::string tag;
};

/// One critic round: reports the worst strata to the backend and keeps the
/// revision only when it lowers the training score. Provenance gains
/// "critic-accepted" or "critic-rejected". Extraction failures count as
/// rejection.
Candidate critique(const Candidate& candidate, const FitnessContext& ctx, const Partition& partition,
                   const PromptBundle& bundle, LlmBackend& backend, const CriticOptions& options = {},
                   std::vector<Exchange>* exchanges = nullptr);

}  // namespace geoprog
