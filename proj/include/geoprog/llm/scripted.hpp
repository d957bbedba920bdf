#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "geoprog/dsl/ast.hpp"
#include "geoprog/llm/backend.hpp"
#include "geoprog/primitives/registry.hpp"
#include "geoprog/util/rng.hpp"

namespace geoprog {

enum class PromptClass { Objective, Crossover, Mutation, Critic };

std::string_view prompt_class_name(PromptClass c);

/// Classifies by the task marker on the first line. Throws UnclassifiablePrompt.
PromptClass classify_prompt(std::string_view prompt);

using ResponseGenerator = std::function<std::string(const std::string& prompt, Rng& rng)>;
using Script = std::map<PromptClass, ResponseGenerator>;

/// Offline backend: the response is a pure function of (prompt, backend seed,
/// sampling seed).
class ScriptedBackend final : public LlmBackend {
 public:
  /// Throws ConfigError unless `script` covers all four prompt classes.
  ScriptedBackend(Script script, std::uint64_t seed);

  std::string complete(const std::string& prompt, const Sampling& sampling) override;
  std::string name() const override { return "scripted"; }

 private:
  Script script_;
  std::uint64_t seed_;
};

/// Program operators behind the built-in recombiner script.
namespace recombiner {

struct Options {
  std::size_t max_features = 6;
  /// Probability that a feature-set crossover also proposes one fresh feature.
  double novelty = 0.5;
};

/// A random program of 1-3 features. Each feature is one of nine measures of
/// a vocabulary concept (or a scalar field), optionally wrapped in log1p or sqrt.
FeatureProgram random_program(const std::vector<std::string>& vocabulary, bool single_feature, Rng& rng);

/// Feature-set mode: a random prefix of p1's bindings (and the p1 features
/// they support) merged with all of p2's bindings and features. Single-feature
/// mode: p1's feature plus a random multiple of p2's. With probability
/// `options.novelty` a feature-set child also gets one fresh random feature
/// over `vocabulary`.
FeatureProgram crossover(const FeatureProgram& p1, const FeatureProgram& p2, const std::vector<std::string>& vocabulary,
                         bool single_feature, Rng& rng, const Options& options = {});

/// Scales one numeric constant by 1.1 or 0.9. Without constants, one of:
/// swap a concept name, change a feature's wrapper, replace a feature with a
/// fresh random one, or add a fresh random feature.
FeatureProgram mutate(const FeatureProgram& p, const std::vector<std::string>& vocabulary, Rng& rng);

/// Adds one random measure (no scalar fields) of a randomly chosen listed
/// stratum that is a vocabulary concept; returns `p` unchanged when there is
/// none or the measure is already present. Single-feature mode adds half the
/// measure to the feature instead.
FeatureProgram critic_revision(const FeatureProgram& p, const std::vector<std::string>& worst_strata,
                               const std::vector<std::string>& vocabulary, bool single_feature, Rng& rng);

}  // namespace recombiner

/// Script built from the recombiner operators; parses its inputs out of the
/// prompts. Responses wrap the program in a fenced block.
Script recombiner_script(std::shared_ptr<const PrimitiveRegistry> registry, recombiner::Options options = {});

/// Script answering every prompt with `response`.
Script constant_script(std::string response);

}  // namespace geoprog
