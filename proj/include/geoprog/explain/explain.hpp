#pragma once

#include <map>
#include <optional>
#include <string>

#include "geoprog/fitness/candidate.hpp"

namespace geoprog {

struct NodeImportance {
  NodeId node = 0;
  std::string label;
  double base_score = 0.0;
  double ablated_score = 0.0;
  /// (ablated - base) / base, clamped at 0; the absolute difference when the
  /// base score is 0.
  double importance = 0.0;
  /// Neutralizing the node breaks evaluation.
  bool structural = false;
};

using ImportanceMap = std::map<NodeId, NodeImportance>;

/// Ablation importance of every call and binding node: the node's output is
/// replaced by its mean over the training set (cellwise for grids, majority
/// per cell for masks and booleans) and `subset` is rescored with the fitted
/// head.
ImportanceMap node_importance(const Candidate& candidate, const ObservationSet& subset, const FitnessContext& ctx);

/// DOT text of the program DAG. With importances, value edges are red with
/// pen width 1 + 7 * importance / max importance and edges out of structural
/// nodes are black and dashed; without, every edge is black with width 1.
std::string export_dot(const Candidate& candidate, const ImportanceMap* importances = nullptr);

/// Importance table as a JSON array.
std::string importance_json(const ImportanceMap& importances);

}  // namespace geoprog
