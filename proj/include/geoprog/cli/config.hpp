#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "geoprog/data/observations.hpp"
#include "geoprog/data/split.hpp"
#include "geoprog/evolution/evolution.hpp"
#include "geoprog/llm/http_backend.hpp"
#include "geoprog/llm/scripted.hpp"

namespace geoprog {

struct BackendConfig {
  std::string kind = "scripted";  // scripted | http
  std::uint64_t seed = 0;
  HttpBackendConfig http;
  recombiner::Options recombiner;
};

/// Parsed `discover`/`baseline` configuration file.
struct RunConfig {
  EvolutionConfig evolution;
  BackendConfig backend;
  double train_ratio = 0.8;
  std::uint64_t split_seed = 0;
  EvalLimits limits;
  std::size_t cache_bytes = std::size_t{4} << 30;
  /// Unset fields fall back to the dataset's target name and metric.
  bool descr_set = false;
  bool metric_set = false;
};

/// Parses the JSON text of a configuration. Unknown keys and wrongly typed
/// values raise ConfigError. Environment variables override the HTTP backend
/// settings.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Fills descr/metric from the dataset where the file left them unset.
void apply_dataset_defaults(RunConfig& config, const ObservationSet& data);

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config, std::shared_ptr<const PrimitiveRegistry> registry);

/// The three subsets of a loaded dataset.
struct DataSplits {
  ObservationSet train;
  ObservationSet test;
  ObservationSet ood;
};
DataSplits make_splits(const ObservationSet& data, double train_ratio, std::uint64_t split_seed);

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitData = 4;
inline constexpr int kExitProgram = 5;
inline constexpr int kExitEvaluation = 6;
inline constexpr int kExitLlm = 7;
inline constexpr int kExitSearch = 8;
inline constexpr int kExitFit = 9;

int exit_code_for(const std::exception& e);
/// {"error": code, "message": text, "exit_code": n}
std::string error_json(const std::exception& e);

}  // namespace geoprog
