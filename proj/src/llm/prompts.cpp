#include "geoprog/llm/prompts.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "geoprog/dsl/printer.hpp"
#include "geoprog/error.hpp"

namespace geoprog {

namespace {

const char* const kCrossoverTemplate = R"({marker}
{objective}

Below are two programs together with their scores ({metric}, lower is better).

Program A (score {score_a}):
```
{program_a}```

Program B (score {score_b}):
```
{program_b}```

Combine the useful elements of Program A and Program B into one new program that should score better than both.
Reply with the complete new program in a single fenced code block.
)";

const char* const kMutationTemplate = R"({marker}
{objective}

Below is a program together with its score ({metric}, lower is better).

Program (score {score}):
```
{program}```

Modify the program so that it estimates the target more accurately, for example by changing a constant, a concept or an operation.
Reply with the complete modified program in a single fenced code block.
)";

const char* const kCriticTemplate = R"({marker}
{objective}

The program below scores {score} overall ({metric}, lower is better).
Its scores on land-use strata of the training data, worst first:

{table}
{worst_line}

Program:
```
{program}```

Improve the program so that it does better on the worst strata without hurting the others.
Reply with the complete improved program in a single fenced code block.
)";

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Drops binding lines from the end of the body, then feature lines from the
// end of the return list, until at least `excess` characters are gone.
std::string shrink_program(const std::string& text, std::size_t excess) {
  if (excess == 0) return text;
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  std::size_t ret = 0;
  while (ret < lines.size() && lines[ret].rfind("    return [", 0) != 0) ++ret;
  if (ret == lines.size() || lines.size() < 2) return text.substr(0, text.size() > excess ? text.size() - excess : 0);

  std::vector<std::string> bindings(lines.begin() + 1, lines.begin() + static_cast<std::ptrdiff_t>(ret));
  std::vector<std::string> features(lines.begin() + static_cast<std::ptrdiff_t>(ret) + 1, lines.end() - 1);
  std::size_t removed = 0, dropped_bindings = 0, dropped_features = 0;
  while (removed < excess && !bindings.empty()) {
    removed += bindings.back().size() + 1;
    bindings.pop_back();
    ++dropped_bindings;
  }
  while (removed < excess && features.size() > 1) {
    removed += features.back().size() + 1;
    features.pop_back();
    ++dropped_features;
  }
  std::string out = lines.front() + "\n";
  for (const auto& b : bindings) out += b + "\n";
  if (dropped_bindings) out += "    # ... " + std::to_string(dropped_bindings) + " bindings omitted\n";
  out += lines[ret] + "\n";
  for (const auto& f : features) out += f + "\n";
  if (dropped_features) out += "        # ... " + std::to_string(dropped_features) + " features omitted\n";
  out += lines.back() + "\n";
  return out;
}

std::string with_marker(std::string_view marker, const std::string& body) { return std::string(marker) + "\n" + body; }

}  // namespace

std::string format_score(double score) {
  if (!std::isfinite(score)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", score);
  return buf;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

bool has_placeholder(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < text.size() && is_ident_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') return true;
  }
  return false;
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        const std::string key(text.substr(i + 1, j - i - 1));
        auto it = values.find(key);
        if (it == values.end()) throw ConfigError("template placeholder {" + key + "} has no value");
        out += it->second;
        i = j;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

std::string grammar_blurb() {
  return R"(Programs are written in a small Python-like language:

    def f(loc):
        name = expression
        ...
        return [
            ("feature_name", expression),
            ...
        ]

- The function has exactly one parameter, the location handle `loc`.
- The body is a sequence of assignments; each name may be assigned once and used only after it is assigned.
- Expressions are numbers, "strings", True/False, names, function calls f(a, b) and the operators + - * / with parentheses.
- There are no loops, conditionals, imports or other statements. Use where/threshold/greater for branching.
- Values are Scalar numbers, Grid rasters, Mask binary rasters or Bool; every returned feature must be a Scalar.
- Only the functions listed below may be called.
)";
}

std::string build_objective_prompt(const std::string& descr, const PrimitiveRegistry& registry,
                                   const std::vector<std::string>& vocabulary, const PromptOptions& options) {
  std::string out = "Given a satellite image, write a function to estimate " + descr + ".\n";
  if (options.feature_set_mode) {
    out +=
        "The function should create a list of predictive features of the location. A linear regressor is fitted on "
        "top of the features and the features together with the regressor form the final estimate.\n";
  } else {
    out += std::string(kSingleFeatureLine) + " A scale and an offset are fitted on top of it.\n";
  }
  out += "\n" + grammar_blurb() + "\nAvailable functions:\n" + registry.catalog();
  if (!vocabulary.empty()) {
    out += "\n" + std::string(kVocabularyLead);
    for (std::size_t i = 0; i < vocabulary.size(); ++i) out += (i ? ", " : "") + vocabulary[i];
    out += "\n";
  }
  if (!options.few_shot.empty()) {
    out += "\nExample programs:\n";
    for (const auto& ex : options.few_shot) out += "```\n" + ex + (ex.ends_with('\n') ? "" : "\n") + "```\n";
  }
  return out;
}

PromptBundle make_prompt_bundle(const std::string& descr, const PrimitiveRegistry& registry,
                                const std::vector<std::string>& vocabulary, const PromptOptions& options) {
  if (descr.empty()) throw ConfigError("target description must not be empty");
  PromptBundle b;
  b.descr = descr;
  b.objective = build_objective_prompt(descr, registry, vocabulary, options);
  b.crossover = kCrossoverTemplate;
  b.mutation = kMutationTemplate;
  b.critic = kCriticTemplate;
  b.grammar_blurb = grammar_blurb();
  b.primitive_catalog = registry.catalog();
  b.vocabulary = vocabulary;
  b.options = options;
  return b;
}

std::string build_initial_prompt(const PromptBundle& bundle) {
  return with_marker(kObjectiveMarker,
                     bundle.objective + "\nReply with the complete program in a single fenced code block.\n");
}

std::string build_crossover_prompt(const Candidate& p1, const Candidate& p2, const PromptBundle& bundle) {
  std::string a = pretty_print(p1.program);
  std::string b = pretty_print(p2.program);
  auto render = [&] {
    return render_template(bundle.crossover, {{"marker", std::string(kCrossoverMarker)},
                                              {"objective", bundle.objective},
                                              {"metric", bundle.options.metric_label},
                                              {"score_a", format_score(p1.score_train)},
                                              {"score_b", format_score(p2.score_train)},
                                              {"program_a", a},
                                              {"program_b", b}});
  };
  std::string prompt = render();
  const std::size_t budget = bundle.options.max_prompt_tokens * 4;
  const std::string full_a = a, full_b = b;
  std::size_t cut_a = 0, cut_b = 0;
  for (int round = 0; round < 8 && prompt.size() > budget; ++round) {
    const std::size_t excess = prompt.size() - budget;
    const std::size_t total = full_a.size() + full_b.size();
    const std::size_t share = total ? (excess * full_a.size() + total - 1) / total : 0;
    cut_a += share;
    cut_b += excess - std::min(excess, share);
    a = shrink_program(full_a, cut_a);
    b = shrink_program(full_b, cut_b);
    prompt = render();
  }
  return prompt;
}

std::string build_mutation_prompt(const Candidate& parent, const PromptBundle& bundle) {
  std::string p = pretty_print(parent.program);
  auto render = [&] {
    return render_template(bundle.mutation, {{"marker", std::string(kMutationMarker)},
                                             {"objective", bundle.objective},
                                             {"metric", bundle.options.metric_label},
                                             {"score", format_score(parent.score_train)},
                                             {"program", p}});
  };
  std::string prompt = render();
  const std::size_t budget = bundle.options.max_prompt_tokens * 4;
  const std::string full = p;
  std::size_t cut = 0;
  for (int round = 0; round < 8 && prompt.size() > budget; ++round) {
    cut += prompt.size() - budget;
    p = shrink_program(full, cut);
    prompt = render();
  }
  return prompt;
}

std::string build_critic_prompt(const Candidate& candidate, const std::vector<StratumReport>& strata,
                                std::size_t worst_k, const PromptBundle& bundle) {
  std::size_t width = 7;
  for (const auto& s : strata) width = std::max(width, s.name.size());
  std::string table;
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  table += "    " + pad("stratum", width) + "  " + pad("score", 10) + "  n\n";
  for (const auto& s : strata)
    table += "    " + pad(s.name, width) + "  " + pad(format_score(s.score), 10) + "  " + std::to_string(s.size) + "\n";
  std::string worst = std::string(kWorstStrataLead);
  for (std::size_t i = 0; i < std::min(worst_k, strata.size()); ++i) worst += (i ? ", " : "") + strata[i].name;
  return render_template(bundle.critic, {{"marker", std::string(kCriticMarker)},
                                         {"objective", bundle.objective},
                                         {"metric", bundle.options.metric_label},
                                         {"score", format_score(candidate.score_train)},
                                         {"table", table},
                                         {"worst_line", worst},
                                         {"program", pretty_print(candidate.program)}});
}

}  // namespace geoprog
