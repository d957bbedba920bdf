#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geoprog/cli/config.hpp"
#include "geoprog/data/manifest.hpp"
#include "geoprog/data/synthetic.hpp"
#include "geoprog/dsl/parser.hpp"
#include "geoprog/dsl/printer.hpp"
#include "geoprog/dsl/typecheck.hpp"
#include "geoprog/error.hpp"
#include "geoprog/evolution/evolution.hpp"
#include "geoprog/explain/explain.hpp"
#include "geoprog/primitives/raster.hpp"
#include "geoprog/simplify/simplify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace geoprog;

namespace {

json score_json(double s) { return std::isfinite(s) ? json(s) : json(nullptr); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

FeatureProgram load_program(const fs::path& path, const PrimitiveRegistry& registry) {
  FeatureProgram program = parse(read_text(path), registry);
  require_well_typed(program, registry);
  return program;
}

std::string lines(const std::vector<std::string>& records) {
  std::string out;
  for (const auto& r : records) out += r + '\n';
  return out;
}

json head_json(const RegressionHead& head, MetricId metric) {
  return json{{"metric", metric_name(metric)},
              {"feature_names", head.feature_names},
              {"weights", head.raw_weights()},
              {"intercept", head.raw_intercept()},
              {"standardized_weights", head.weights},
              {"standardized_intercept", head.intercept},
              {"feature_means", head.feature_means},
              {"feature_stds", head.feature_stds},
              {"log_target", head.log_target},
              {"epsilon", head.epsilon}};
}

const ObservationSet& pick_split(const DataSplits& splits, const std::string& name) {
  if (name == "train") return splits.train;
  if (name == "test") return splits.test;
  if (name == "ood") return splits.ood;
  throw ConfigError("unknown split '" + name + "'");
}

struct Session {
  std::shared_ptr<const PrimitiveRegistry> registry = std::make_shared<const PrimitiveRegistry>(default_registry());
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

FitnessContext fitness_on(const Session& s, const ObservationSet& train, const ObservationSet* test, MetricId metric,
                          PrimitiveCache& cache, const EvalLimits& limits = {}) {
  FitnessContext ctx;
  ctx.train = &train;
  ctx.test = test;
  ctx.registry = s.registry.get();
  ctx.metric = Metric{metric};
  ctx.limits = limits;
  ctx.cache = &cache;
  ctx.threads = s.threads;
  return ctx;
}

int cmd_gen_data(const std::string& preset, std::uint64_t seed, std::size_t n, std::size_t tile,
                 const std::optional<double>& noise, const fs::path& out, const Session& s) {
  SyntheticWorldSpec spec = synthetic_preset(preset, seed, n);
  spec.tile_size = tile;
  if (noise) spec.noise_sigma = *noise;
  const ObservationSet obs = generate_synthetic_world(spec, *s.registry);
  fs::create_directories(out);
  save_manifest(obs, out / "manifest.json");
  std::cout << json{{"manifest", (out / "manifest.json").string()},
                    {"observations", obs.size()},
                    {"target_name", obs.target_name},
                    {"metric", metric_name(obs.metric)}}
                   .dump()
            << '\n';
  return kExitOk;
}

int cmd_discover(const fs::path& data_dir, const std::optional<fs::path>& config_path, const fs::path& out,
                 const Session& s) {
  RunConfig config = config_path ? load_run_config(*config_path) : parse_run_config("{}");
  const ObservationSet data = load_manifest(data_dir);
  apply_dataset_defaults(config, data);
  const DataSplits splits = make_splits(data, config.train_ratio, config.split_seed);
  auto backend = make_backend(config.backend, s.registry);

  PrimitiveCache cache(config.cache_bytes);
  RunInputs inputs;
  inputs.train = &splits.train;
  inputs.test = &splits.test;
  inputs.ood = &splits.ood;
  inputs.registry = s.registry.get();
  inputs.cache = &cache;
  inputs.limits = config.limits;
  inputs.threads = s.threads;
  const RunResult result = run(config.evolution, *backend, inputs);

  std::vector<std::string> transcript;
  for (const auto& ex : result.transcript) transcript.push_back(transcript_record(ex));
  const FitnessContext ctx = fitness_on(s, splits.train, &splits.test, config.evolution.metric, cache, config.limits);
  const ImportanceMap importances = node_importance(result.best, splits.train, ctx);

  fs::create_directories(out);
  write_file_atomic(out / "best.fp", pretty_print(result.best.program));
  write_file_atomic(out / "head.json", head_json(result.best.head, config.evolution.metric).dump(2) + "\n");
  write_file_atomic(out / "run.jsonl", lines(result.log));
  write_file_atomic(out / "transcript.jsonl", lines(transcript));
  write_file_atomic(out / "best.dot", export_dot(result.best, &importances));
  std::cout << json{{"score_train", score_json(result.best.score_train)},
                    {"score_test", score_json(result.best_test)},
                    {"score_ood", score_json(result.best_ood)},
                    {"mean_baseline_test", score_json(mean_baseline_score(splits.train, splits.test,
                                                                          Metric{config.evolution.metric}))},
                    {"generations", result.generations_run},
                    {"llm_calls", result.llm_calls}}
                   .dump()
            << '\n';
  return kExitOk;
}

int cmd_eval(const fs::path& program_path, const fs::path& data_dir, const std::string& split, const Session& s) {
  const FeatureProgram program = load_program(program_path, *s.registry);
  const ObservationSet data = load_manifest(data_dir);
  const DataSplits splits = make_splits(data, 0.8, 0);
  const ObservationSet& target = pick_split(splits, split);
  PrimitiveCache cache;
  json scores = json::object();
  for (MetricId m : all_metrics()) {
    const FitnessContext ctx = fitness_on(s, splits.train, nullptr, m, cache);
    const Candidate c = fit_candidate(program, ctx);
    if (!c.valid) throw RuntimeError(c.error);
    scores[std::string(metric_name(m))] = score_json(score(c, target, ctx));
  }
  std::cout << json{{"split", split}, {"observations", target.size()}, {"scores", scores}}.dump() << '\n';
  return kExitOk;
}

int cmd_simplify(const fs::path& program_path, const fs::path& data_dir, const std::optional<fs::path>& out,
                 const Session& s) {
  const FeatureProgram program = load_program(program_path, *s.registry);
  const ObservationSet data = load_manifest(data_dir);
  const DataSplits splits = make_splits(data, 0.8, 0);
  PrimitiveCache cache;
  const FitnessContext ctx = fitness_on(s, splits.train, &splits.test, data.metric, cache);
  const Candidate before = fit_candidate(program, ctx);
  if (!before.valid) throw RuntimeError(before.error);
  const Candidate after = simplify(before, ctx);

  std::vector<std::string> removed_bindings, pruned_features;
  for (const auto& b : program.bindings)
    if (!after.program.find_binding(b.name)) removed_bindings.push_back(b.name);
  for (const auto& f : program.features)
    if (std::none_of(after.program.features.begin(), after.program.features.end(),
                     [&](const NamedExpr& g) { return g.name == f.name; }))
      pruned_features.push_back(f.name);
  const std::string text = pretty_print(after.program);
  if (out) write_file_atomic(*out, text);
  std::cout << json{{"program", text},
                    {"removed_bindings", removed_bindings},
                    {"pruned_features", pruned_features},
                    {"score_train_before", score_json(before.score_train)},
                    {"score_train_after", score_json(after.score_train)},
                    {"score_test_before", score_json(before.score_test)},
                    {"score_test_after", score_json(after.score_test)}}
                   .dump()
            << '\n';
  return kExitOk;
}

int cmd_explain(const fs::path& program_path, const fs::path& data_dir, const fs::path& dot, const std::string& split,
                const Session& s) {
  const FeatureProgram program = load_program(program_path, *s.registry);
  const ObservationSet data = load_manifest(data_dir);
  const DataSplits splits = make_splits(data, 0.8, 0);
  PrimitiveCache cache;
  const FitnessContext ctx = fitness_on(s, splits.train, &splits.test, data.metric, cache);
  const Candidate c = fit_candidate(program, ctx);
  if (!c.valid) throw RuntimeError(c.error);
  const ImportanceMap importances = node_importance(c, pick_split(splits, split), ctx);
  write_file_atomic(dot, export_dot(c, &importances));
  std::cout << importance_json(importances) << '\n';
  return kExitOk;
}

FeatureProgram concept_bottleneck(const std::vector<std::string>& vocabulary, const PrimitiveRegistry& registry) {
  std::ostringstream src;
  src << "def cb(loc):\n    return [\n";
  for (const auto& c : vocabulary) src << "        (\"frac_" << c << "\", area_fraction(mask(loc, \"" << c << "\"))),\n";
  for (const auto& f : scalar_field_names()) src << "        (\"" << f << "\", scalar_field(loc, \"" << f << "\")),\n";
  src << "    ]\n";
  return parse(src.str(), registry);
}

int cmd_baseline(const std::string& kind, const fs::path& data_dir, const std::optional<fs::path>& config_path,
                 const Session& s) {
  RunConfig config = config_path ? load_run_config(*config_path) : parse_run_config("{}");
  const ObservationSet data = load_manifest(data_dir);
  apply_dataset_defaults(config, data);
  const DataSplits splits = make_splits(data, config.train_ratio, config.split_seed);
  const Metric metric{config.evolution.metric};
  PrimitiveCache cache(config.cache_bytes);
  json out{{"kind", kind}, {"metric", metric_name(metric.id)}};

  if (kind == "mean") {
    out["score_train"] = score_json(mean_baseline_score(splits.train, splits.train, metric));
    out["score_test"] = score_json(mean_baseline_score(splits.train, splits.test, metric));
    out["score_ood"] = score_json(mean_baseline_score(splits.train, splits.ood, metric));
  } else if (kind == "cb") {
    const FitnessContext ctx = fitness_on(s, splits.train, &splits.test, metric.id, cache, config.limits);
    const Candidate c = fit_candidate(concept_bottleneck(data.vocabulary, *s.registry), ctx);
    if (!c.valid) throw RuntimeError(c.error);
    out["score_train"] = score_json(c.score_train);
    out["score_test"] = score_json(c.score_test);
    out["score_ood"] = score_json(score(c, splits.ood, ctx));
    out["features"] = c.head.feature_names;
  } else if (kind == "random-search" || kind == "zero-shot") {
    RunInputs inputs;
    inputs.train = &splits.train;
    inputs.test = &splits.test;
    inputs.ood = &splits.ood;
    inputs.registry = s.registry.get();
    inputs.cache = &cache;
    inputs.limits = config.limits;
    inputs.threads = s.threads;
    if (kind == "zero-shot") {
      auto backend = make_backend(config.backend, s.registry);
      const auto programs = zero_shot(config.evolution, *backend, inputs, 5);
      double sum = 0.0;
      std::size_t valid = 0;
      for (const auto& c : programs)
        if (c.valid) sum += c.score_test, ++valid;
      out["score_test"] = score_json(sum / static_cast<double>(valid));
      out["programs"] = programs.size();
      out["valid_programs"] = valid;
    } else {
      EvolutionConfig evo = config.evolution;
      std::size_t budget = evo.llm_call_budget;
      if (budget == 0) {
        evo.mode = SearchMode::Evolution;
        auto matched_backend = make_backend(config.backend, s.registry);
        budget = run(evo, *matched_backend, inputs).llm_calls;
      }
      evo.mode = SearchMode::RandomSearch;
      evo.llm_call_budget = budget;
      auto backend = make_backend(config.backend, s.registry);
      const RunResult r = run(evo, *backend, inputs);
      out["score_train"] = score_json(r.best.score_train);
      out["score_test"] = score_json(r.best_test);
      out["score_ood"] = score_json(r.best_ood);
      out["llm_calls"] = r.llm_calls;
      out["llm_call_budget"] = budget;
      out["program"] = pretty_print(r.best.program);
    }
  } else {
    throw ConfigError("unknown baseline kind '" + kind + "'");
  }
  std::cout << out.dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary discovery of interpretable feature programs over geospatial observations"};
  app.require_subcommand(1);
  Session session;
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: hardware concurrency)")->check(CLI::PositiveNumber);

  std::string preset = "density-synthetic", split = "test", kind;
  std::uint64_t seed = 7;
  std::size_t n = 1000, tile = 64;
  std::optional<double> noise;
  std::string data, out, program, dot;
  std::optional<std::string> config, program_out;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen->add_option("--preset", preset, "density-synthetic | poverty-synthetic | agb-synthetic")->capture_default_str();
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--n", n, "Number of observations")->capture_default_str();
  gen->add_option("--tile-size", tile)->capture_default_str();
  gen->add_option("--noise", noise, "Target noise standard deviation (preset default when unset)");
  gen->add_option("--out", out, "Output directory")->required();

  auto* disc = app.add_subcommand("discover", "Run the evolutionary search");
  disc->add_option("--data", data, "Dataset directory or manifest")->required();
  disc->add_option("--config", config, "JSON configuration file");
  disc->add_option("--out", out, "Output directory")->required();

  auto* ev = app.add_subcommand("eval", "Score a program under every metric");
  ev->add_option("--program", program)->required();
  ev->add_option("--data", data)->required();
  ev->add_option("--split", split)->check(CLI::IsMember({"train", "test", "ood"}))->capture_default_str();

  auto* simp = app.add_subcommand("simplify", "Remove dead code and prune weak features");
  simp->add_option("--program", program)->required();
  simp->add_option("--data", data)->required();
  simp->add_option("--out", program_out, "Write the simplified program here");

  auto* expl = app.add_subcommand("explain", "Node importances and a DOT rendering of the program DAG");
  expl->add_option("--program", program)->required();
  expl->add_option("--data", data)->required();
  expl->add_option("--dot", dot)->required();
  expl->add_option("--split", split)->check(CLI::IsMember({"train", "test", "ood"}))->capture_default_str();

  auto* base = app.add_subcommand("baseline", "Score a baseline");
  base->add_option("--kind", kind)->required()->check(CLI::IsMember({"mean", "cb", "random-search", "zero-shot"}));
  base->add_option("--data", data)->required();
  base->add_option("--config", config, "JSON configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return kExitOk;
    std::cerr << json{{"error", "UsageError"}, {"message", e.what()}, {"exit_code", kExitUsage}}.dump() << '\n';
    return kExitUsage;
  }
  if (threads > 0) session.threads = threads;

  try {
    auto opt_path = [](const std::optional<std::string>& p) {
      return p ? std::optional<fs::path>(*p) : std::optional<fs::path>();
    };
    if (gen->parsed()) return cmd_gen_data(preset, seed, n, tile, noise, out, session);
    if (disc->parsed()) return cmd_discover(data, opt_path(config), out, session);
    if (ev->parsed()) return cmd_eval(program, data, split, session);
    if (simp->parsed()) return cmd_simplify(program, data, opt_path(program_out), session);
    if (expl->parsed()) return cmd_explain(program, data, dot, split, session);
    if (base->parsed()) return cmd_baseline(kind, data, opt_path(config), session);
  } catch (const std::exception& e) {
    std::cerr << error_json(e) << '\n';
    return exit_code_for(e);
  }
  return kExitInternal;
}
