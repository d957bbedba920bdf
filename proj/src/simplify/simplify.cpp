#include "geoprog/simplify/simplify.hpp"

#include <algorithm>
#include <cmath>

#include "geoprog/dsl/dag.hpp"

namespace geoprog {

namespace {

Candidate refit(const FeatureProgram& program, const Candidate& from, const FitnessContext& ctx,
                const std::string& step) {
  auto provenance = from.provenance;
  provenance.push_back(step);
  Candidate c = fit_candidate(program, ctx, std::move(provenance));
  c.id = from.id;
  c.generation = from.generation;
  return c;
}

}  // namespace

DceResult dead_code_eliminate_rounds(const FeatureProgram& program) {
  DceResult result{program, 0, 0};
  while (true) {
    const ProgramDag dag = ast_to_dag(result.program);
    std::vector<bool> dead(result.program.bindings.size(), false);
    bool any = false;
    for (NodeId id : dag.leaves()) {
      const auto& node = dag.node(id);
      if (node.kind != NodeKind::Binding) continue;
      dead[node.binding_index] = true;
      any = true;
    }
    if (!any) return result;
    std::vector<Binding> kept;
    for (std::size_t i = 0; i < dead.size(); ++i)
      if (!dead[i]) kept.push_back(result.program.bindings[i]);
    result.removed += result.program.bindings.size() - kept.size();
    result.program.bindings = std::move(kept);
    ++result.rounds;
  }
}

FeatureProgram dead_code_eliminate(const FeatureProgram& program) { return dead_code_eliminate_rounds(program).program; }

std::vector<std::size_t> features_to_prune(const RegressionHead& head, double threshold_ratio) {
  std::vector<std::size_t> out;
  if (head.weights.empty()) return out;
  std::size_t best = 0;
  for (std::size_t j = 1; j < head.weights.size(); ++j)
    if (std::abs(head.weights[j]) > std::abs(head.weights[best])) best = j;
  const double cut = threshold_ratio * std::abs(head.weights[best]);
  for (std::size_t j = 0; j < head.weights.size(); ++j)
    if (j != best && std::abs(head.weights[j]) < cut) out.push_back(j);
  return out;
}

PruneResult prune_features(const Candidate& candidate, const FitnessContext& ctx, const PruneOptions& options) {
  PruneResult result{candidate, {}, false};
  if (!candidate.valid) return result;
  const auto drop = features_to_prune(candidate.head, options.threshold_ratio);
  if (drop.empty()) return result;

  FeatureProgram program = candidate.program;
  std::vector<NamedExpr> kept;
  for (std::size_t j = 0; j < program.features.size(); ++j) {
    if (std::find(drop.begin(), drop.end(), j) != drop.end())
      result.pruned.push_back(program.features[j].name);
    else
      kept.push_back(program.features[j]);
  }
  program.features = std::move(kept);
  program = dead_code_eliminate(program);

  Candidate pruned = refit(program, candidate, ctx, "pruned");
  const double limit = candidate.score_train * (1.0 + options.max_relative_regression) + 1e-12;
  if (!pruned.valid || !(pruned.score_train <= limit)) {
    result.reverted = true;
    result.candidate.provenance.push_back("prune-reverted");
    return result;
  }
  result.candidate = std::move(pruned);
  return result;
}

Candidate simplify(const Candidate& candidate, const FitnessContext& ctx, const PruneOptions& options) {
  if (!candidate.valid) return candidate;
  Candidate current = candidate;
  const std::size_t max_rounds = candidate.program.features.size() + 1;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    const DceResult dce = dead_code_eliminate_rounds(current.program);
    if (dce.removed > 0) current = refit(dce.program, current, ctx, "dce");
    const PruneResult pr = prune_features(current, ctx, options);
    const bool changed = !pr.pruned.empty() && !pr.reverted;
    current = pr.candidate;
    if (!changed) break;
  }
  // Collapse the intermediate steps into one provenance entry.
  Candidate out = current;
  out.provenance = candidate.provenance;
  if (current.provenance.size() > candidate.provenance.size() &&
      std::find(current.provenance.begin() + static_cast<std::ptrdiff_t>(candidate.provenance.size()),
                current.provenance.end(), "prune-reverted") != current.provenance.end())
    out.provenance.push_back("prune-reverted");
  out.provenance.push_back("simplified");
  return out;
}

}  // namespace geoprog
