#include "geoprog/fitness/candidate.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "geoprog/error.hpp"

namespace geoprog {

namespace {

struct FitRows {
  std::vector<std::vector<double>> features;
  std::vector<double> targets;
};

FitRows usable_rows(const FeatureTable& table, const ObservationSet& set) {
  FitRows rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!table.ok(i)) continue;
    rows.features.push_back(table.rows[i]);
    rows.targets.push_back(set.targets[i]);
  }
  return rows;
}

void check_error_rate(const FeatureTable& table, const EvalLimits& limits) {
  if (table.size() > 0 && table.error_rate() > limits.max_error_rate)
    throw RuntimeError("EvaluationFailed", "program failed on " + std::to_string(table.failures()) + " of " +
                                               std::to_string(table.size()) + " observations; first error: " +
                                               table.first_error());
}

std::vector<double> predictions_from(const RegressionHead& head, const FeatureTable& table) {
  std::vector<double> out(table.size());
  const double fallback = head.log_target ? std::exp(head.intercept) : head.intercept;
  for (std::size_t i = 0; i < table.size(); ++i) out[i] = table.ok(i) ? head.predict(table.rows[i]) : fallback;
  return out;
}

}  // namespace

void Partition::check_covers(const std::vector<std::string>& ids) const {
  std::unordered_set<std::string> seen;
  std::size_t total = 0;
  for (const auto& [name, members] : strata)
    for (const auto& id : members) {
      if (!seen.insert(id).second) throw SchemaError("observation " + id + " appears in more than one stratum");
      ++total;
    }
  const std::unordered_set<std::string> expected(ids.begin(), ids.end());
  if (total != expected.size()) throw SchemaError("strata do not cover the observation set");
  for (const auto& id : seen)
    if (!expected.contains(id)) throw SchemaError("stratum member " + id + " is not in the observation set");
}

EvalEnv FitnessContext::env_for(const ObservationSet& set) const {
  EvalEnv env;
  env.registry = registry;
  env.masks = set.masks.get();
  env.cache = cache;
  env.limits = limits;
  env.threads = threads;
  return env;
}

Candidate fit_candidate(FeatureProgram program, const FitnessContext& ctx, std::vector<std::string> provenance) {
  Candidate c;
  c.provenance = std::move(provenance);
  c.program = std::move(program);
  try {
    c.compiled = std::make_shared<const CompiledProgram>(c.program, *ctx.registry);
    const auto table = evaluate_table(*c.compiled, ctx.train->inputs, ctx.env_for(*ctx.train));
    check_error_rate(table, ctx.limits);
    auto rows = usable_rows(table, *ctx.train);
    c.head = fit_head(rows.features, rows.targets, c.compiled->feature_names(), ctx.metric, ctx.ridge);
    c.train_predictions = predictions_from(c.head, table);
    c.score_train = ctx.metric.score(c.train_predictions, ctx.train->targets);
    if (ctx.test && !ctx.test->empty()) c.score_test = score(c, *ctx.test, ctx);
    if (!std::isfinite(c.score_train)) throw DegenerateFit("non-finite training score");
    c.valid = true;
  } catch (const Error& e) {
    c.valid = false;
    c.error = e.code() + ": " + e.what();
    c.score_train = kWorstScore;
    c.score_test = kWorstScore;
    c.train_predictions.clear();
  }
  return c;
}

RegressionHead fit_head(const FeatureProgram& program, const ObservationSet& train, const FitnessContext& ctx) {
  const CompiledProgram compiled(program, *ctx.registry);
  const auto table = evaluate_table(compiled, train.inputs, ctx.env_for(train));
  check_error_rate(table, ctx.limits);
  auto rows = usable_rows(table, train);
  return fit_head(rows.features, rows.targets, compiled.feature_names(), ctx.metric, ctx.ridge);
}

std::vector<double> predict(const Candidate& candidate, const ObservationSet& set, const FitnessContext& ctx) {
  if (!candidate.compiled) throw ConfigError("candidate has no compiled program");
  const auto table = evaluate_table(*candidate.compiled, set.inputs, ctx.env_for(set));
  return predictions_from(candidate.head, table);
}

double score(const Candidate& candidate, const ObservationSet& set, const FitnessContext& ctx) {
  if (set.empty()) throw EmptySubset("cannot score an empty observation subset");
  return ctx.metric.score(predict(candidate, set, ctx), set.targets);
}

std::map<std::string, double> stratified_score(std::span<const double> predictions, const ObservationSet& set,
                                               const Partition& partition, const Metric& metric) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < set.size(); ++i) index.emplace(set.inputs[i].id, i);
  std::map<std::string, double> out;
  for (const auto& [name, members] : partition.strata) {
    std::vector<double> losses;
    losses.reserve(members.size());
    for (const auto& id : members) {
      auto it = index.find(id);
      if (it == index.end()) throw SchemaError("stratum member " + id + " is not in the observation set");
      losses.push_back(metric.loss(predictions[it->second], set.targets[it->second]));
    }
    out[name] = losses.empty() ? kWorstScore : metric.aggregate(losses);
  }
  return out;
}

std::map<std::string, double> stratified_score(const Candidate& candidate, const ObservationSet& set,
                                               const Partition& partition, const FitnessContext& ctx) {
  if (&set == ctx.train && candidate.train_predictions.size() == set.size())
    return stratified_score(candidate.train_predictions, set, partition, ctx.metric);
  return stratified_score(predict(candidate, set, ctx), set, partition, ctx.metric);
}

double mean_baseline_score(const ObservationSet& train, const ObservationSet& eval, const Metric& metric) {
  if (train.empty() || eval.empty()) throw EmptySubset("mean baseline needs non-empty train and evaluation sets");
  double center = 0.0;
  for (double y : train.targets) center += metric.is_log() ? std::log(std::max(y, metric.epsilon)) : y;
  center /= static_cast<double>(train.size());
  const double prediction = metric.is_log() ? std::exp(center) : center;
  const std::vector<double> predictions(eval.size(), prediction);
  return metric.score(predictions, eval.targets);
}

}  // namespace geoprog
