#pragma once

#include <string>
#include <vector>

#include "geoprog/fitness/candidate.hpp"

namespace geoprog {

struct DceResult {
  FeatureProgram program;
  /// Rounds that removed at least one binding.
  int rounds = 0;
  std::size_t removed = 0;
};

/// Repeatedly deletes every binding whose DAG node has no consumers until no
/// such leaf remains.
DceResult dead_code_eliminate_rounds(const FeatureProgram& program);
FeatureProgram dead_code_eliminate(const FeatureProgram& program);

struct PruneOptions {
  double threshold_ratio = 0.05;
  /// Largest accepted relative increase of the training score after pruning
  /// and refitting; beyond it the unpruned candidate is kept.
  double max_relative_regression = 0.05;
};

/// Indices of features with |standardized weight| < ratio * max |standardized
/// weight|. The largest-weight feature is never included.
std::vector<std::size_t> features_to_prune(const RegressionHead& head, double threshold_ratio);

struct PruneResult {
  Candidate candidate;
  std::vector<std::string> pruned;
  /// Pruning was undone because the refitted score regressed too much.
  bool reverted = false;
};

/// Drops weak features, removes the dead code this leaves behind and refits.
PruneResult prune_features(const Candidate& candidate, const FitnessContext& ctx, const PruneOptions& options = {});

/// Dead-code elimination and pruning alternated to a fixpoint, then refitted
/// and rescored. Invalid candidates are returned unchanged.
Candidate simplify(const Candidate& candidate, const FitnessContext& ctx, const PruneOptions& options = {});

}  // namespace geoprog
