#include "geoprog/evolution/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "geoprog/dsl/printer.hpp"
#include "geoprog/error.hpp"
#include "geoprog/llm/extract.hpp"
#include "geoprog/util/parallel.hpp"

namespace geoprog {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kGenerationStream = 2;

json score_json(double s) { return std::isfinite(s) ? json(s) : json(nullptr); }

struct SlotResult {
  Candidate candidate;
  std::vector<Exchange> exchanges;
};

std::string tag(int generation, std::size_t slot) {
  return "g" + std::to_string(generation) + "/s" + std::to_string(slot);
}

Sampling generation_sampling(const EvolutionConfig& cfg, std::uint64_t seed) {
  return {cfg.generation_temperature, cfg.max_tokens, seed};
}

FeatureProgram shape(FeatureProgram program, const EvolutionConfig& cfg) {
  return cfg.feature_set_mode ? program : to_single_feature(program);
}

Candidate invalid_candidate(std::vector<std::string> provenance, const std::string& error) {
  Candidate c;
  c.provenance = std::move(provenance);
  c.error = error;
  return c;
}

// Critic, simplification and strata scores shared by every offspring path.
void finish(Candidate& c, SearchContext& ctx, int generation, std::size_t slot, std::vector<Exchange>& exchanges,
            bool allow_critic = true) {
  const auto& cfg = *ctx.config;
  if (!c.valid) return;
  if (allow_critic && cfg.critic_enabled && ctx.strata) {
    CriticOptions options;
    options.worst_k = cfg.worst_k;
    options.sampling = {cfg.critic_temperature, cfg.max_tokens,
                        derive_seed(cfg.seed, {kGenerationStream, static_cast<std::uint64_t>(generation), slot, 3})};
    options.attempts = cfg.attempts;
    options.tag = tag(generation, slot);
    c = critique(c, *ctx.fitness, *ctx.strata, *ctx.bundle, *ctx.backend, options, &exchanges);
    if (!cfg.feature_set_mode && c.program.features.size() > 1) {
      auto provenance = c.provenance;
      c = fit_candidate(to_single_feature(c.program), *ctx.fitness, std::move(provenance));
    }
  }
  if (cfg.simplify_enabled) c = simplify(c, *ctx.fitness, cfg.prune);
  if (c.valid && ctx.strata) c.strata_scores = stratified_score(c, *ctx.fitness->train, *ctx.strata, *ctx.fitness);
}

SlotResult sample_fresh(SearchContext& ctx, int generation, std::size_t slot, int attempts, const char* first_step) {
  const auto& cfg = *ctx.config;
  SlotResult out;
  RequestOptions request{attempts,
                         generation_sampling(cfg, derive_seed(cfg.seed, {kInitStream, static_cast<std::uint64_t>(generation), slot})),
                         "objective", tag(generation, slot)};
  try {
    FeatureProgram p = request_program(*ctx.backend, build_initial_prompt(*ctx.bundle), *ctx.fitness->registry, request,
                                       &out.exchanges);
    out.candidate = fit_candidate(shape(std::move(p), cfg), *ctx.fitness, {first_step});
  } catch (const LlmError& e) {
    out.candidate = invalid_candidate({first_step}, e.code() + ": " + e.what());
  }
  return out;
}

SlotResult make_offspring(SearchContext& ctx, const std::vector<const Candidate*>& pool, int generation,
                          std::size_t slot) {
  const auto& cfg = *ctx.config;
  const auto g = static_cast<std::uint64_t>(generation);
  Rng rng(derive_seed(cfg.seed, {kGenerationStream, g, slot, 0}));
  SlotResult out;
  const auto [p1, p2] = sample_parents(pool, rng);
  const bool mutate = uniform01(rng) < cfg.mutation_prob;
  const std::string cross_step = "crossover(" + std::to_string(p1->id) + "," + std::to_string(p2->id) + ")";

  Candidate child;
  try {
    RequestOptions request{cfg.attempts, generation_sampling(cfg, derive_seed(cfg.seed, {kGenerationStream, g, slot, 1})),
                           "crossover", tag(generation, slot)};
    FeatureProgram p = request_program(*ctx.backend, build_crossover_prompt(*p1, *p2, *ctx.bundle),
                                       *ctx.fitness->registry, request, &out.exchanges);
    child = fit_candidate(shape(std::move(p), cfg), *ctx.fitness, {cross_step});
  } catch (const LlmError& e) {
    child = invalid_candidate({cross_step}, e.code() + ": " + e.what());
  }

  if (mutate) {
    const Candidate& base = child.valid ? child : *p1;
    auto provenance = child.provenance;
    provenance.push_back(child.valid ? std::string("mutation") : "mutation(" + std::to_string(p1->id) + ")");
    try {
      RequestOptions request{cfg.attempts,
                             generation_sampling(cfg, derive_seed(cfg.seed, {kGenerationStream, g, slot, 2})),
                             "mutation", tag(generation, slot)};
      FeatureProgram p = request_program(*ctx.backend, build_mutation_prompt(base, *ctx.bundle),
                                         *ctx.fitness->registry, request, &out.exchanges);
      child = fit_candidate(shape(std::move(p), cfg), *ctx.fitness, std::move(provenance));
    } catch (const LlmError& e) {
      child = invalid_candidate(std::move(provenance), e.code() + ": " + e.what());
    }
  }
  finish(child, ctx, generation, slot, out.exchanges);
  out.candidate = std::move(child);
  return out;
}

// Assigns ids and generation numbers in slot order, logs, and folds into the bank.
ProgramBank collect(std::vector<SlotResult>& slots, SearchContext& ctx, int generation,
                    const std::optional<Candidate>& best_before) {
  ProgramBank bank;
  bank.generation = generation;
  bank.best_ever = best_before;
  for (auto& s : slots) {
    s.candidate.id = ctx.next_id++;
    s.candidate.generation = generation;
    for (auto& ex : s.exchanges) ctx.transcript.push_back(std::move(ex));
    const std::string line = candidate_record(s.candidate, "candidate");
    ctx.log.push_back(line);
    if (ctx.log_sink) *ctx.log_sink << line << '\n';
    bank.consider(s.candidate);
    bank.members.push_back(std::move(s.candidate));
  }
  return bank;
}

void log_generation(const ProgramBank& bank, SearchContext& ctx) {
  json j{{"event", "generation"},
         {"generation", bank.generation},
         {"members", bank.members.size()},
         {"valid", bank.valid_count()},
         {"llm_calls", ctx.backend->calls()},
         {"llm_budget_nominal", ctx.config->nominal_llm_budget()}};
  if (bank.best_ever) {
    j["best_id"] = bank.best_ever->id;
    j["best_train"] = score_json(bank.best_ever->score_train);
    j["best_test"] = score_json(bank.best_ever->score_test);
  }
  const std::string line = j.dump();
  ctx.log.push_back(line);
  if (ctx.log_sink) *ctx.log_sink << line << '\n';
}

unsigned slot_threads(const SearchContext& ctx) {
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(ctx.threads, ctx.config->llm_concurrency)));
}

}  // namespace

void EvolutionConfig::validate() const {
  if (generations < 1) throw ConfigError("generations must be >= 1");
  if (population < 2) throw ConfigError("population must be >= 2");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw ConfigError("mutation_prob must lie in [0, 1]");
  if (attempts < 1) throw ConfigError("attempts must be >= 1");
  if (llm_concurrency < 1) throw ConfigError("llm_concurrency must be >= 1");
  if (descr.empty()) throw ConfigError("descr must not be empty");
}

std::size_t EvolutionConfig::nominal_llm_budget() const {
  const double per_offspring = 1.0 + mutation_prob + (critic_enabled ? 1.0 : 0.0);
  return population + static_cast<std::size_t>(std::llround(static_cast<double>(generations) *
                                                             static_cast<double>(population) * per_offspring));
}

std::string CountingBackend::complete(const std::string& prompt, const Sampling& sampling) {
  ++calls_;
  return inner_.complete(prompt, sampling);
}

void ProgramBank::consider(const Candidate& c) {
  if (!c.valid) return;
  if (!best_ever || c.score_train < best_ever->score_train) best_ever = c;
}

std::size_t ProgramBank::valid_count() const {
  return static_cast<std::size_t>(std::count_if(members.begin(), members.end(), [](const Candidate& c) { return c.valid; }));
}

std::pair<const Candidate*, const Candidate*> sample_parents(const std::vector<const Candidate*>& pool, Rng& rng) {
  std::vector<const Candidate*> ranked;
  for (const auto* c : pool)
    if (c && c->valid) ranked.push_back(c);
  if (ranked.size() < 2) throw TooFewValid("need at least 2 valid members, have " + std::to_string(ranked.size()));
  std::stable_sort(ranked.begin(), ranked.end(), [](const Candidate* a, const Candidate* b) {
    if (a->score_train != b->score_train) return a->score_train < b->score_train;
    return a->id < b->id;
  });
  std::vector<double> weights(ranked.size());
  for (std::size_t r = 0; r < ranked.size(); ++r) weights[r] = 1.0 / static_cast<double>(r + 1);
  auto draw = [&] {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double u = uniform01(rng) * total;
    for (std::size_t r = 0; r < weights.size(); ++r) {
      if (weights[r] == 0.0) continue;
      if (u < weights[r]) return r;
      u -= weights[r];
    }
    for (std::size_t r = weights.size(); r-- > 0;)
      if (weights[r] > 0.0) return r;
    return std::size_t{0};
  };
  const std::size_t first = draw();
  weights[first] = 0.0;
  const std::size_t second = draw();
  return {ranked[first], ranked[second]};
}

std::pair<const Candidate*, const Candidate*> sample_parents(const ProgramBank& bank, Rng& rng) {
  std::vector<const Candidate*> pool;
  for (const auto& m : bank.members) pool.push_back(&m);
  return sample_parents(pool, rng);
}

FeatureProgram to_single_feature(const FeatureProgram& program) {
  if (program.features.size() <= 1) return program;
  FeatureProgram out = program;
  out.features.resize(1);
  return dead_code_eliminate(out);
}

std::string candidate_record(const Candidate& c, const std::string& event) {
  json strata = json::object();
  for (const auto& [k, v] : c.strata_scores) strata[k] = score_json(v);
  json j{{"event", event},
         {"generation", c.generation},
         {"candidate_id", c.id},
         {"provenance", c.provenance},
         {"valid", c.valid},
         {"score_train", score_json(c.score_train)},
         {"score_test", score_json(c.score_test)},
         {"strata_scores", strata}};
  if (!c.error.empty()) j["error"] = c.error;
  if (!c.program.features.empty()) j["program"] = pretty_print(c.program);
  return j.dump();
}

PromptBundle bundle_for(const EvolutionConfig& config, const PrimitiveRegistry& registry,
                        const std::vector<std::string>& vocabulary) {
  PromptOptions options;
  options.feature_set_mode = config.feature_set_mode;
  options.max_prompt_tokens = config.max_prompt_tokens;
  options.few_shot = config.few_shot;
  options.metric_label = std::string(metric_name(config.metric));
  return make_prompt_bundle(config.descr, registry, vocabulary, options);
}

ProgramBank init_population(SearchContext& ctx) {
  const auto& cfg = *ctx.config;
  std::vector<SlotResult> slots(cfg.population);
  parallel_for(slots.size(), slot_threads(ctx),
               [&](std::size_t i) { slots[i] = sample_fresh(ctx, 0, i, cfg.attempts, "init"); });
  for (auto& s : slots)
    if (s.candidate.valid && ctx.strata)
      s.candidate.strata_scores = stratified_score(s.candidate, *ctx.fitness->train, *ctx.strata, *ctx.fitness);
  ProgramBank bank = collect(slots, ctx, 0, std::nullopt);
  log_generation(bank, ctx);
  if (bank.valid_count() == 0) {
    const std::string why = bank.members.empty() ? "" : bank.members.front().error;
    throw AllInvalid("every initial program is invalid; first error: " + why);
  }
  return bank;
}

ProgramBank step_generation(const ProgramBank& bank, SearchContext& ctx) {
  const auto& cfg = *ctx.config;
  const int generation = bank.generation + 1;
  std::vector<const Candidate*> pool;
  for (const auto& m : bank.members) pool.push_back(&m);
  if (bank.valid_count() < 2 && bank.best_ever) pool.push_back(&*bank.best_ever);

  std::vector<SlotResult> slots(cfg.population);
  parallel_for(slots.size(), slot_threads(ctx),
               [&](std::size_t i) { slots[i] = make_offspring(ctx, pool, generation, i); });
  ProgramBank next = collect(slots, ctx, generation, bank.best_ever);
  log_generation(next, ctx);
  if (next.valid_count() == 0) throw AllInvalid("every offspring of generation " + std::to_string(generation) + " is invalid");
  return next;
}

namespace {

// Fresh objective samples for one generation, stopping at the call budget.
ProgramBank random_generation(const ProgramBank& bank, SearchContext& ctx, std::size_t budget) {
  const auto& cfg = *ctx.config;
  const int generation = bank.generation + 1;
  std::vector<SlotResult> slots;
  for (std::size_t i = 0; i < cfg.population; ++i) {
    const std::size_t used = ctx.backend->calls();
    if (used >= budget) break;
    const int attempts = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.attempts), budget - used));
    SlotResult s = sample_fresh(ctx, generation, i, attempts, "random");
    finish(s.candidate, ctx, generation, i, s.exchanges, ctx.backend->calls() < budget);
    slots.push_back(std::move(s));
  }
  ProgramBank next = collect(slots, ctx, generation, bank.best_ever);
  log_generation(next, ctx);
  return next;
}

}  // namespace

namespace {

FitnessContext fitness_for(const EvolutionConfig& config, const RunInputs& inputs) {
  if (!inputs.train || !inputs.test || !inputs.registry) throw ConfigError("run needs train, test and a registry");
  FitnessContext fitness;
  fitness.train = inputs.train;
  fitness.test = inputs.test;
  fitness.registry = inputs.registry;
  fitness.metric = Metric{config.metric};
  fitness.limits = inputs.limits;
  fitness.cache = inputs.cache;
  const unsigned outer = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, inputs.threads), config.llm_concurrency));
  fitness.threads = outer > 1 ? 1 : std::max(1u, inputs.threads);
  return fitness;
}

}  // namespace

std::vector<Candidate> zero_shot(const EvolutionConfig& config, LlmBackend& backend, const RunInputs& inputs,
                                 std::size_t count) {
  EvolutionConfig cfg = config;
  cfg.population = count;
  cfg.critic_enabled = false;
  cfg.simplify_enabled = false;
  cfg.validate();
  const FitnessContext fitness = fitness_for(cfg, inputs);
  const PromptBundle bundle = bundle_for(cfg, *inputs.registry, inputs.train->vocabulary);
  CountingBackend counting(backend);
  SearchContext ctx;
  ctx.config = &cfg;
  ctx.bundle = &bundle;
  ctx.backend = &counting;
  ctx.fitness = &fitness;
  ctx.threads = inputs.threads;
  return init_population(ctx).members;
}

std::string transcript_record(const Exchange& ex) {
  json j{{"kind", ex.kind},
         {"tag", ex.tag},
         {"attempt", ex.attempt},
         {"temperature", ex.temperature},
         {"seed", ex.seed},
         {"prompt", ex.prompt},
         {"response", ex.response}};
  if (!ex.error.empty()) j["error"] = ex.error;
  return j.dump();
}

RunResult run(const EvolutionConfig& config, LlmBackend& backend, const RunInputs& inputs) {
  config.validate();
  const FitnessContext fitness = fitness_for(config, inputs);
  const PromptBundle bundle = bundle_for(config, *inputs.registry, inputs.train->vocabulary);
  std::optional<Partition> strata;
  if (config.critic_enabled) {
    const auto& categories = config.critic_categories.empty() ? inputs.train->vocabulary : config.critic_categories;
    strata = partition_by_landuse(*inputs.train, categories);
  }

  CountingBackend counting(backend);
  SearchContext ctx;
  ctx.config = &config;
  ctx.bundle = &bundle;
  ctx.backend = &counting;
  ctx.fitness = &fitness;
  ctx.strata = strata ? &*strata : nullptr;
  ctx.threads = inputs.threads;
  ctx.log_sink = inputs.log_sink;

  RunResult result;
  ProgramBank bank = init_population(ctx);
  result.best_train_history.push_back(bank.best_ever->score_train);
  if (config.mode == SearchMode::Evolution) {
    for (int t = 0; t < config.generations; ++t) {
      bank = step_generation(bank, ctx);
      result.best_train_history.push_back(bank.best_ever->score_train);
    }
  } else {
    const std::size_t budget = config.llm_call_budget ? config.llm_call_budget : config.nominal_llm_budget();
    while (counting.calls() < budget) {
      const std::size_t before = counting.calls();
      bank = random_generation(bank, ctx, budget);
      result.best_train_history.push_back(bank.best_ever->score_train);
      if (counting.calls() == before) break;
    }
  }

  result.best = *bank.best_ever;
  result.generations_run = bank.generation;
  result.best_test = result.best.score_test;
  if (inputs.ood && !inputs.ood->empty()) result.best_ood = score(result.best, *inputs.ood, fitness);
  result.llm_calls = counting.calls();

  json summary{{"event", "result"},
               {"best_id", result.best.id},
               {"score_train", score_json(result.best.score_train)},
               {"score_test", score_json(result.best_test)},
               {"score_ood", score_json(result.best_ood)},
               {"generations", result.generations_run},
               {"llm_calls", result.llm_calls},
               {"llm_budget_nominal", config.nominal_llm_budget()},
               {"program", pretty_print(result.best.program)}};
  ctx.log.push_back(summary.dump());
  if (ctx.log_sink) *ctx.log_sink << ctx.log.back() << '\n';
  result.log = std::move(ctx.log);
  result.transcript = std::move(ctx.transcript);
  return result;
}

}  // namespace geoprog
