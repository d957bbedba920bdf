#include "geoprog/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "geoprog/error.hpp"

namespace geoprog {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  bool ok = true;
  if constexpr (std::is_same_v<T, bool>) {
    ok = it->is_boolean();
  } else if constexpr (std::is_integral_v<T>) {
    ok = it->is_number_integer() && (!std::is_unsigned_v<T> || it->template get<std::int64_t>() >= 0 ||
                                     it->is_number_unsigned());
  } else if constexpr (std::is_floating_point_v<T>) {
    ok = it->is_number();
  } else if constexpr (std::is_same_v<T, std::string>) {
    ok = it->is_string();
  } else {
    ok = it->is_array() && std::all_of(it->begin(), it->end(), [](const json& v) { return v.is_string(); });
  }
  if (!ok) throw ConfigError(std::string("key '") + key + "' has the wrong type");
  out = it->template get<T>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  check_keys(root, "configuration",
             {"generations", "population", "mutation_prob", "descr", "metric", "seed", "critic", "simplify",
              "feature_set", "mode", "llm_call_budget", "attempts", "llm_concurrency", "generation_temperature",
              "critic_temperature", "max_tokens", "worst_k", "critic_categories", "prune_threshold",
              "prune_max_regression", "max_prompt_tokens", "few_shot", "split", "limits", "cache_bytes", "backend"});
  RunConfig c;
  auto& e = c.evolution;
  read(root, "generations", e.generations);
  read(root, "population", e.population);
  read(root, "mutation_prob", e.mutation_prob);
  if (root.contains("descr")) {
    read(root, "descr", e.descr);
    c.descr_set = true;
  }
  if (root.contains("metric")) {
    std::string name;
    read(root, "metric", name);
    e.metric = parse_metric(name);
    c.metric_set = true;
  }
  read(root, "seed", e.seed);
  read(root, "critic", e.critic_enabled);
  read(root, "simplify", e.simplify_enabled);
  read(root, "feature_set", e.feature_set_mode);
  if (root.contains("mode")) {
    std::string mode;
    read(root, "mode", mode);
    if (mode == "evolution")
      e.mode = SearchMode::Evolution;
    else if (mode == "random-search")
      e.mode = SearchMode::RandomSearch;
    else
      throw ConfigError("mode must be 'evolution' or 'random-search', got '" + mode + "'");
  }
  read(root, "llm_call_budget", e.llm_call_budget);
  read(root, "attempts", e.attempts);
  read(root, "llm_concurrency", e.llm_concurrency);
  read(root, "generation_temperature", e.generation_temperature);
  read(root, "critic_temperature", e.critic_temperature);
  read(root, "max_tokens", e.max_tokens);
  read(root, "worst_k", e.worst_k);
  read(root, "critic_categories", e.critic_categories);
  read(root, "prune_threshold", e.prune.threshold_ratio);
  read(root, "prune_max_regression", e.prune.max_relative_regression);
  read(root, "max_prompt_tokens", e.max_prompt_tokens);
  read(root, "few_shot", e.few_shot);
  read(root, "cache_bytes", c.cache_bytes);

  if (auto it = root.find("split"); it != root.end()) {
    check_keys(*it, "split", {"train_ratio", "seed"});
    read(*it, "train_ratio", c.train_ratio);
    read(*it, "seed", c.split_seed);
  }
  if (!(c.train_ratio > 0.0 && c.train_ratio < 1.0)) throw ConfigError("split.train_ratio must lie in (0, 1)");
  if (auto it = root.find("limits"); it != root.end()) {
    check_keys(*it, "limits", {"step_budget", "timeout_ms", "max_error_rate"});
    read(*it, "step_budget", c.limits.step_budget);
    std::int64_t ms = c.limits.timeout.count();
    read(*it, "timeout_ms", ms);
    if (ms <= 0) throw ConfigError("limits.timeout_ms must be positive");
    c.limits.timeout = std::chrono::milliseconds(ms);
    read(*it, "max_error_rate", c.limits.max_error_rate);
  }
  if (auto it = root.find("backend"); it != root.end()) {
    check_keys(*it, "backend",
               {"kind", "seed", "url", "model", "api_key", "timeout_s", "retries", "max_features", "novelty"});
    read(*it, "kind", c.backend.kind);
    read(*it, "seed", c.backend.seed);
    read(*it, "url", c.backend.http.url);
    read(*it, "model", c.backend.http.model);
    read(*it, "api_key", c.backend.http.api_key);
    read(*it, "timeout_s", c.backend.http.timeout_s);
    read(*it, "retries", c.backend.http.retries);
    read(*it, "max_features", c.backend.recombiner.max_features);
    read(*it, "novelty", c.backend.recombiner.novelty);
  }
  if (c.backend.kind != "scripted" && c.backend.kind != "http")
    throw ConfigError("backend.kind must be 'scripted' or 'http', got '" + c.backend.kind + "'");
  c.backend.http.apply_environment();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

void apply_dataset_defaults(RunConfig& config, const ObservationSet& data) {
  if (!config.descr_set) config.evolution.descr = data.target_name;
  if (!config.metric_set) config.evolution.metric = data.metric;
}

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config, std::shared_ptr<const PrimitiveRegistry> registry) {
  if (config.kind == "http") return std::make_unique<HttpBackend>(config.http);
  if (config.kind == "scripted")
    return std::make_unique<ScriptedBackend>(recombiner_script(std::move(registry), config.recombiner), config.seed);
  throw ConfigError("unknown backend kind '" + config.kind + "'");
}

DataSplits make_splits(const ObservationSet& data, double train_ratio, std::uint64_t split_seed) {
  const SplitSpec split = split_by_longitude(data, train_ratio, split_seed);
  return {data.subset(split.train_ids), data.subset(split.test_ids), data.subset(split.ood_ids)};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UnknownCategory*>(&e)) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e)) return kExitData;
  if (dynamic_cast<const DslError*>(&e) || dynamic_cast<const TypeCheckFailed*>(&e)) return kExitProgram;
  if (dynamic_cast<const RuntimeError*>(&e)) return kExitEvaluation;
  if (dynamic_cast<const LlmError*>(&e)) return kExitLlm;
  if (dynamic_cast<const AllInvalid*>(&e) || dynamic_cast<const TooFewValid*>(&e)) return kExitSearch;
  if (dynamic_cast<const DegenerateFit*>(&e) || dynamic_cast<const EmptySubset*>(&e)) return kExitFit;
  return kExitInternal;
}

std::string error_json(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  const json j{{"error", err ? err->code() : std::string("InternalError")},
               {"message", e.what()},
               {"exit_code", exit_code_for(e)}};
  return j.dump();
}

}  // namespace geoprog
