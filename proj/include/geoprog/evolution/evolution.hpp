#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "geoprog/critic/critic.hpp"
#include "geoprog/fitness/candidate.hpp"
#include "geoprog/llm/backend.hpp"
#include "geoprog/llm/prompts.hpp"
#include "geoprog/simplify/simplify.hpp"
#include "geoprog/util/rng.hpp"

namespace geoprog {

enum class SearchMode { Evolution, RandomSearch };

struct EvolutionConfig {
  int generations = 15;
  std::size_t population = 100;
  double mutation_prob = 0.3;
  std::string descr;
  MetricId metric = MetricId::L2_LOG;
  std::uint64_t seed = 0;
  bool critic_enabled = true;
  bool simplify_enabled = true;
  bool feature_set_mode = true;
  SearchMode mode = SearchMode::Evolution;
  /// Backend calls allowed in RandomSearch mode; 0 means nominal_llm_budget().
  std::size_t llm_call_budget = 0;

  int attempts = 3;
  std::size_t llm_concurrency = 8;
  double generation_temperature = 0.8;
  double critic_temperature = 0.2;
  int max_tokens = 1024;
  std::size_t worst_k = 2;
  /// Strata categories for the critic; empty means the dataset vocabulary.
  std::vector<std::string> critic_categories;
  PruneOptions prune;
  std::size_t max_prompt_tokens = 3000;
  std::vector<std::string> few_shot;

  /// Throws ConfigError.
  void validate() const;
  /// Expected backend calls of an evolution run without retries:
  /// M * (1 + T * (1 + rho_m + critic)).
  std::size_t nominal_llm_budget() const;
};

/// Wraps a backend and counts calls.
class CountingBackend final : public LlmBackend {
 public:
  explicit CountingBackend(LlmBackend& inner) : inner_(inner) {}
  std::string complete(const std::string& prompt, const Sampling& sampling) override;
  std::string name() const override { return inner_.name(); }
  std::size_t calls() const { return calls_.load(); }

 private:
  LlmBackend& inner_;
  std::atomic<std::size_t> calls_{0};
};

struct ProgramBank {
  int generation = 0;
  std::vector<Candidate> members;
  std::optional<Candidate> best_ever;

  /// Replaces best_ever when `c` is valid and strictly better on train.
  void consider(const Candidate& c);
  std::size_t valid_count() const;
};

/// Parent draw: valid members ranked by training score (ties by id), drawn
/// with probability proportional to 1 / rank; the second parent is drawn
/// from the remaining members. Throws TooFewValid.
std::pair<const Candidate*, const Candidate*> sample_parents(const std::vector<const Candidate*>& pool, Rng& rng);
std::pair<const Candidate*, const Candidate*> sample_parents(const ProgramBank& bank, Rng& rng);

/// State shared by the operations of one run.
struct SearchContext {
  const EvolutionConfig* config = nullptr;
  const PromptBundle* bundle = nullptr;
  CountingBackend* backend = nullptr;
  const FitnessContext* fitness = nullptr;
  const Partition* strata = nullptr;  // required when the critic is enabled
  unsigned threads = 1;
  std::uint64_t next_id = 1;
  std::vector<Exchange> transcript;
  std::vector<std::string> log;  // JSON lines
  std::ostream* log_sink = nullptr;
};

/// M candidates from the objective prompt alone. Throws AllInvalid.
ProgramBank init_population(SearchContext& ctx);

/// M offspring via crossover, optional mutation, critic and simplification.
/// The returned bank keeps best_ever. Throws AllInvalid when every offspring
/// is invalid.
ProgramBank step_generation(const ProgramBank& bank, SearchContext& ctx);

struct RunResult {
  Candidate best;
  double best_test = kWorstScore;
  double best_ood = kWorstScore;
  int generations_run = 0;
  std::size_t llm_calls = 0;
  std::vector<std::string> log;
  std::vector<Exchange> transcript;
  /// Best training score after each generation (index 0 = initial bank).
  std::vector<double> best_train_history;
};

struct RunInputs {
  const ObservationSet* train = nullptr;
  const ObservationSet* test = nullptr;
  const ObservationSet* ood = nullptr;  // optional
  const PrimitiveRegistry* registry = nullptr;
  PrimitiveCache* cache = nullptr;
  EvalLimits limits;
  unsigned threads = 1;
  std::ostream* log_sink = nullptr;
};

/// Initialization followed by T generations (Evolution), or repeated fresh
/// objective samples until the call budget is spent (RandomSearch).
RunResult run(const EvolutionConfig& config, LlmBackend& backend, const RunInputs& inputs);

/// `count` programs sampled from the objective prompt alone (no critic, no
/// simplification), fitted on train and scored on test; invalid samples are
/// kept. Throws AllInvalid when none is valid.
std::vector<Candidate> zero_shot(const EvolutionConfig& config, LlmBackend& backend, const RunInputs& inputs,
                                 std::size_t count);

/// The prompt bundle `run` uses for a configuration and dataset.
PromptBundle bundle_for(const EvolutionConfig& config, const PrimitiveRegistry& registry,
                        const std::vector<std::string>& vocabulary);

/// One JSON-lines record per candidate.
std::string candidate_record(const Candidate& c, const std::string& event);

/// One JSON-lines record per backend exchange.
std::string transcript_record(const Exchange& exchange);

/// Keeps only the first feature and removes the dead code left behind.
FeatureProgram to_single_feature(const FeatureProgram& program);

}  // namespace geoprog
