#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geoprog/fitness/candidate.hpp"
#include "geoprog/primitives/registry.hpp"

namespace geoprog {

// First-line markers that identify the prompt class.
inline constexpr std::string_view kObjectiveMarker = "### TASK: WRITE PROGRAM";
inline constexpr std::string_view kCrossoverMarker = "### TASK: CROSSOVER";
inline constexpr std::string_view kMutationMarker = "### TASK: MUTATION";
inline constexpr std::string_view kCriticMarker = "### TASK: CRITIC";

// Lines the scripted backend reads back out of prompts.
inline constexpr std::string_view kVocabularyLead = "Concepts available to mask(loc, concept): ";
inline constexpr std::string_view kSingleFeatureLine =
    "Return exactly one feature; its value must directly estimate the target.";
inline constexpr std::string_view kWorstStrataLead = "Worst strata: ";

struct PromptOptions {
  bool feature_set_mode = true;
  /// Prompt budget in tokens, estimated as characters / 4.
  std::size_t max_prompt_tokens = 3000;
  /// Optional example programs appended to the objective prompt.
  std::vector<std::string> few_shot;
  std::string metric_label = "L2_LOG";
};

/// Prompt templates with their fixed sections. Templates use {name}
/// placeholders; every placeholder must be bound when rendering.
struct PromptBundle {
  std::string descr;
  std::string objective;
  std::string crossover;
  std::string mutation;
  std::string critic;
  std::string grammar_blurb;
  std::string primitive_catalog;
  std::vector<std::string> vocabulary;
  PromptOptions options;
};

/// Short grammar description shown to the model.
std::string grammar_blurb();

/// The objective prompt on its own, without a task marker.
std::string build_objective_prompt(const std::string& descr, const PrimitiveRegistry& registry,
                                   const std::vector<std::string>& vocabulary = {}, const PromptOptions& options = {});

PromptBundle make_prompt_bundle(const std::string& descr, const PrimitiveRegistry& registry,
                                const std::vector<std::string>& vocabulary, const PromptOptions& options = {});

/// Substitutes {name} placeholders. Throws ConfigError for a placeholder with
/// no binding.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& values);

/// True when `text` still contains a {identifier} placeholder.
bool has_placeholder(std::string_view text);

/// chars / 4, rounded up.
std::size_t estimate_tokens(std::string_view text);

std::string build_initial_prompt(const PromptBundle& bundle);
std::string build_crossover_prompt(const Candidate& p1, const Candidate& p2, const PromptBundle& bundle);
std::string build_mutation_prompt(const Candidate& parent, const PromptBundle& bundle);

struct StratumReport {
  std::string name;
  double score = 0.0;
  std::size_t size = 0;
};

/// `strata` in display order (worst first); the first `worst_k` are named as
/// the improvement targets.
std::string build_critic_prompt(const Candidate& candidate, const std::vector<StratumReport>& strata,
                                std::size_t worst_k, const PromptBundle& bundle);

/// Score formatted with four decimals ("inf" for the invalid sentinel).
std::string format_score(double score);

}  // namespace geoprog
