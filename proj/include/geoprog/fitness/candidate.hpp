#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "geoprog/data/observations.hpp"
#include "geoprog/dsl/evaluator.hpp"
#include "geoprog/fitness/metric.hpp"
#include "geoprog/fitness/partition.hpp"
#include "geoprog/fitness/regression.hpp"

namespace geoprog {

/// Score given to invalid candidates; they are never selected as parents.
inline constexpr double kWorstScore = std::numeric_limits<double>::infinity();

struct Candidate {
  std::uint64_t id = 0;
  int generation = 0;
  FeatureProgram program;
  std::shared_ptr<const CompiledProgram> compiled;
  RegressionHead head;
  bool valid = false;
  std::string error;
  double score_train = kWorstScore;
  double score_test = kWorstScore;
  std::map<std::string, double> strata_scores;
  /// Steps that produced this candidate, oldest first: "init",
  /// "crossover(a,b)", "mutation(a)", "critic-accepted", "critic-rejected",
  /// "simplified", ...
  std::vector<std::string> provenance;
  /// Predictions on the training set, aligned with its observations.
  std::vector<double> train_predictions;

  std::string last_step() const { return provenance.empty() ? "" : provenance.back(); }
};

/// Everything needed to fit and score programs.
struct FitnessContext {
  const ObservationSet* train = nullptr;
  const ObservationSet* test = nullptr;  // optional
  const PrimitiveRegistry* registry = nullptr;
  Metric metric;
  EvalLimits limits{};
  PrimitiveCache* cache = nullptr;
  unsigned threads = 1;
  RidgeOptions ridge{};

  EvalEnv env_for(const ObservationSet& set) const;
};

/// Compiles, evaluates on train, fits the head and scores on train (and test
/// when present). Problems are recorded in `error` with valid = false rather
/// than thrown.
Candidate fit_candidate(FeatureProgram program, const FitnessContext& ctx, std::vector<std::string> provenance = {});

/// Fits only the head; throws TypeCheckFailed, DegenerateFit, or the first
/// evaluation error when the failure rate exceeds the limit.
RegressionHead fit_head(const FeatureProgram& program, const ObservationSet& train, const FitnessContext& ctx);

/// Predictions for every observation of `set`. Rows whose evaluation fails
/// get the head's intercept-only prediction.
std::vector<double> predict(const Candidate& candidate, const ObservationSet& set, const FitnessContext& ctx);

/// Mean metric over `set` (root-mean for RMSE). Throws EmptySubset.
double score(const Candidate& candidate, const ObservationSet& set, const FitnessContext& ctx);

/// Per-stratum scores from predictions aligned with `set`. Empty strata get
/// kWorstScore.
std::map<std::string, double> stratified_score(std::span<const double> predictions, const ObservationSet& set,
                                               const Partition& partition, const Metric& metric);
std::map<std::string, double> stratified_score(const Candidate& candidate, const ObservationSet& set,
                                               const Partition& partition, const FitnessContext& ctx);

/// Score of the constant predictor fitted on `train` (the mean of the
/// targets, or their geometric mean for log metrics) evaluated on `eval`.
double mean_baseline_score(const ObservationSet& train, const ObservationSet& eval, const Metric& metric);

}  // namespace geoprog
