#include "geoprog/llm/scripted.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include "geoprog/dsl/parser.hpp"
#include "geoprog/dsl/printer.hpp"
#include "geoprog/error.hpp"
#include "geoprog/llm/extract.hpp"
#include "geoprog/llm/prompts.hpp"

namespace geoprog {

std::string_view prompt_class_name(PromptClass c) {
  switch (c) {
    case PromptClass::Objective: return "objective";
    case PromptClass::Crossover: return "crossover";
    case PromptClass::Mutation: return "mutation";
    case PromptClass::Critic: return "critic";
  }
  return "?";
}

PromptClass classify_prompt(std::string_view prompt) {
  const std::string_view first = prompt.substr(0, prompt.find('\n'));
  if (first == kObjectiveMarker) return PromptClass::Objective;
  if (first == kCrossoverMarker) return PromptClass::Crossover;
  if (first == kMutationMarker) return PromptClass::Mutation;
  if (first == kCriticMarker) return PromptClass::Critic;
  throw UnclassifiablePrompt("prompt does not start with a known task marker");
}

ScriptedBackend::ScriptedBackend(Script script, std::uint64_t seed) : script_(std::move(script)), seed_(seed) {
  for (auto c : {PromptClass::Objective, PromptClass::Crossover, PromptClass::Mutation, PromptClass::Critic})
    if (!script_.contains(c) || !script_.at(c))
      throw ConfigError("script has no generator for " + std::string(prompt_class_name(c)) + " prompts");
}

std::string ScriptedBackend::complete(const std::string& prompt, const Sampling& sampling) {
  const PromptClass c = classify_prompt(prompt);
  Rng rng(derive_seed(seed_, {fnv1a(prompt), sampling.seed}));
  return script_.at(c)(prompt, rng);
}

namespace recombiner {

namespace {

ExprPtr rename(const ExprPtr& e, const std::map<std::string, std::string>& names) {
  if (e->type == Expr::Type::Var) {
    auto it = names.find(e->name);
    return it == names.end() ? e : Expr::make_var(it->second);
  }
  if (e->args.empty()) return e;
  auto copy = std::make_shared<Expr>(*e);
  for (auto& a : copy->args) a = rename(a, names);
  return copy;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
  if (!taken.contains(base)) return base;
  for (int i = 2;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!taken.contains(candidate)) return candidate;
  }
}

std::string identifier_for(const std::string& concept_name) {
  std::string out;
  for (char c : concept_name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out.empty() ? "c" : out;
}

// Helper for assembling a program while reusing structurally equal bindings.
struct Builder {
  FeatureProgram program;
  std::set<std::string> binding_names{"loc"};
  std::set<std::string> feature_names;

  std::string bind(const std::string& base, ExprPtr value) {
    for (const auto& b : program.bindings)
      if (structurally_equal(*b.value, *value)) return b.name;
    std::string name = fresh_name(base, binding_names);
    binding_names.insert(name);
    program.bindings.push_back({name, std::move(value), {}});
    return name;
  }

  bool has_feature(const Expr& value) const {
    return std::any_of(program.features.begin(), program.features.end(),
                       [&](const NamedExpr& f) { return structurally_equal(*f.value, value); });
  }

  void feature(const std::string& base, ExprPtr value) {
    std::string name = fresh_name(base, feature_names);
    feature_names.insert(name);
    program.features.push_back({name, std::move(value), {}});
  }
};

ExprPtr call(std::string name, std::vector<ExprPtr> args) { return Expr::make_call(std::move(name), std::move(args)); }
ExprPtr var(const std::string& name) { return Expr::make_var(name); }
ExprPtr num(double v) { return Expr::make_number(v); }

const std::vector<std::string> kFields{"temperature", "precipitation", "nightlight", "elevation"};

// log1p(e / s) with a log-uniform scale s in [1/4, 16], rounded to 2 decimals.
ExprPtr log_wrap(const ExprPtr& e, Rng& rng) {
  const double scale = std::round(std::exp2(-2.0 + 6.0 * uniform01(rng)) * 100.0) / 100.0;
  return call("log1p", {Expr::make_binary('/', e, num(scale))});
}

// Strips a log1p(e / s) or sqrt(e) wrapper.
ExprPtr unwrap(const ExprPtr& e) {
  if (e->type != Expr::Type::Call || e->args.size() != 1) return e;
  if (e->name == "sqrt") return e->args[0];
  if (e->name != "log1p") return e;
  const ExprPtr& a = e->args[0];
  if (a->type == Expr::Type::Binary && a->op == '/' && a->args[1]->type == Expr::Type::Number) return a->args[0];
  return a;
}

// One random feature: a measure of a concept (or a scalar field), optionally
// wrapped in log1p or sqrt. Returns (feature base name, expression).
std::pair<std::string, ExprPtr> template_feature(Builder& b, const std::vector<std::string>& vocabulary, Rng& rng,
                                                 const std::string* concept_name = nullptr) {
  const std::string c = concept_name ? *concept_name : vocabulary[uniform_index(rng, vocabulary.size())];
  const std::string c2 = vocabulary[uniform_index(rng, vocabulary.size())];
  const std::string id = identifier_for(c);
  auto mask_of = [&](const std::string& concept_name) {
    return var(b.bind("m_" + identifier_for(concept_name),
                      call("mask", {var("loc"), Expr::make_string(concept_name)})));
  };
  auto dist_of = [&](const std::string& concept_name) {
    return var(b.bind("d_" + identifier_for(concept_name), call("distance_transform", {mask_of(concept_name)})));
  };
  static const double kRadius[] = {2.0, 5.0, 10.0, 20.0};
  const double k = kRadius[uniform_index(rng, 4)];
  std::string name;
  ExprPtr e;
  switch (uniform_index(rng, concept_name ? 8 : 9)) {
    case 0: name = "frac_" + id, e = call("area_fraction", {mask_of(c)}); break;
    case 1: name = "dist_" + id, e = call("mean", {dist_of(c)}); break;
    case 2: name = "maxdist_" + id, e = call("max", {dist_of(c)}); break;
    case 3: name = "clipdist_" + id, e = call("mean", {call("min", {dist_of(c), num(k)})}); break;
    case 4: name = "far_" + id, e = call("area_fraction", {call("threshold", {dist_of(c), num(k)})}); break;
    case 5: name = "near_" + id, e = call("area_fraction", {call("not", {call("threshold", {dist_of(c), num(k)})})}); break;
    case 6:
      name = "frac_" + id + "_or_" + identifier_for(c2);
      e = call("area_fraction", {call("or", {mask_of(c), mask_of(c2)})});
      break;
    case 7:
      name = "frac_" + id + "_near_" + identifier_for(c2);
      e = call("area_fraction", {call("and", {mask_of(c), call("not", {call("threshold", {dist_of(c2), num(k)})})})});
      break;
    default: {
      const std::string& f = kFields[uniform_index(rng, kFields.size())];
      name = f, e = call(f, {var("loc")});
    }
  }
  const double u = uniform01(rng);
  if (u < 0.3) return {"log_" + name, log_wrap(e, rng)};
  if (u < 0.5) return {"sqrt_" + name, call("sqrt", {e})};
  return {name, e};
}

}  // namespace

FeatureProgram random_program(const std::vector<std::string>& vocabulary, bool single_feature, Rng& rng) {
  Builder b;
  if (vocabulary.empty()) {
    b.feature("nightlight", call("nightlight", {var("loc")}));
    return b.program;
  }
  if (single_feature) {
    auto [name, e] = template_feature(b, vocabulary, rng);
    if (uniform01(rng) < 0.5) {
      static const double kScale[] = {0.5, 1.0, 2.0};
      auto second = template_feature(b, vocabulary, rng);
      e = Expr::make_binary('+', e, Expr::make_binary('*', num(kScale[uniform_index(rng, 3)]), second.second));
      name = "estimate";
    }
    b.feature(name, e);
  } else {
    const std::size_t n = uniform01(rng) < 0.7 ? 1 : 2;
    for (std::size_t k = 0; k < n; ++k) {
      auto [name, e] = template_feature(b, vocabulary, rng);
      if (!b.has_feature(*e)) b.feature(name, e);
    }
  }
  if (uniform01(rng) < 0.25) {
    const std::string c = vocabulary[uniform_index(rng, vocabulary.size())];
    const std::string name = fresh_name("unused", b.binding_names);
    b.binding_names.insert(name);
    b.program.bindings.push_back({name, call("mask", {var("loc"), Expr::make_string(c)}), {}});
  }
  return b.program;
}

FeatureProgram crossover(const FeatureProgram& p1, const FeatureProgram& p2, const std::vector<std::string>& vocabulary,
                         bool single_feature, Rng& rng, const Options& options) {
  Builder b;
  const std::size_t prefix = single_feature ? p1.bindings.size() : uniform_index(rng, p1.bindings.size() + 1);
  std::map<std::string, std::string> names1{{p1.param, "loc"}};
  for (std::size_t i = 0; i < prefix; ++i) {
    const auto& binding = p1.bindings[i];
    names1[binding.name] = b.bind(binding.name, rename(binding.value, names1));
  }
  std::map<std::string, std::string> names2{{p2.param, "loc"}};
  for (const auto& binding : p2.bindings) names2[binding.name] = b.bind(binding.name, rename(binding.value, names2));

  if (single_feature) {
    static const double kScale[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    const ExprPtr e1 = rename(p1.features.front().value, names1);
    const ExprPtr e2 = rename(p2.features.front().value, names2);
    b.feature("estimate", Expr::make_binary('+', e1, Expr::make_binary('*', num(kScale[uniform_index(rng, 5)]), e2)));
    return b.program;
  }

  std::vector<NamedExpr> from_p1;
  for (const auto& f : p1.features) {
    const auto refs = referenced_names(*f.value);
    if (std::all_of(refs.begin(), refs.end(), [&](const std::string& r) { return names1.contains(r); }))
      from_p1.push_back({f.name, rename(f.value, names1), {}});
  }
  std::vector<NamedExpr> from_p2;
  for (const auto& f : p2.features) from_p2.push_back({f.name, rename(f.value, names2), {}});

  // A fresh feature proposed alongside the merge takes one slot.
  std::optional<std::pair<std::string, ExprPtr>> novel;
  if (!vocabulary.empty() && uniform01(rng) < options.novelty) novel = template_feature(b, vocabulary, rng);
  const std::size_t cap = std::max<std::size_t>(options.max_features, 1) - (novel ? 1 : 0);
  const std::size_t room = cap > from_p2.size() ? cap - from_p2.size() : 0;
  std::size_t taken = 0;
  for (const auto& f : from_p1) {
    if (taken >= room) break;
    if (b.has_feature(*f.value)) continue;
    b.feature(f.name, f.value);
    ++taken;
  }
  for (const auto& f : from_p2) {
    if (b.program.features.size() >= std::max<std::size_t>(cap, 1)) break;
    if (!b.has_feature(*f.value)) b.feature(f.name, f.value);
  }
  if (novel && !b.has_feature(*novel->second)) b.feature(novel->first, novel->second);
  return b.program;
}

FeatureProgram mutate(const FeatureProgram& p, const std::vector<std::string>& vocabulary, Rng& rng) {
  // Collect slots (binding or feature index, then pre-order position).
  std::vector<ExprPtr*> roots;
  FeatureProgram out = p;
  for (auto& bnd : out.bindings) roots.push_back(&bnd.value);
  for (auto& f : out.features) roots.push_back(&f.value);

  auto count = [&](auto pred) {
    std::size_t n = 0;
    for (auto* r : roots) walk(**r, [&](const Expr& e) { n += pred(e) ? 1 : 0; });
    return n;
  };
  auto is_number = [](const Expr& e) { return e.type == Expr::Type::Number; };
  auto is_concept = [](const Expr& e) {
    return e.type == Expr::Type::Call && e.name == "mask" && e.args.size() == 2 &&
           e.args[1]->type == Expr::Type::String;
  };

  // Rebuilds the `target`-th node matching `pred` with `change`.
  auto replace_nth = [&](auto pred, std::size_t target, auto change) {
    std::size_t seen = 0;
    std::function<ExprPtr(const ExprPtr&)> rebuild = [&](const ExprPtr& e) -> ExprPtr {
      if (pred(*e)) {
        if (seen++ == target) return change(*e);
      }
      if (e->args.empty()) return e;
      auto copy = std::make_shared<Expr>(*e);
      for (auto& a : copy->args) a = rebuild(a);
      return copy;
    };
    for (auto* r : roots) *r = rebuild(*r);
  };

  if (const std::size_t numbers = count(is_number); numbers > 0) {
    const std::size_t target = uniform_index(rng, numbers);
    const double factor = uniform01(rng) < 0.5 ? 1.1 : 0.9;
    replace_nth(is_number, target, [&](const Expr& e) { return Expr::make_number(e.number * factor); });
    return out;
  }
  if (vocabulary.empty()) return out;
  const double u = uniform01(rng);
  const std::size_t concepts = count(is_concept);
  if (u < 0.4 && concepts > 0 && vocabulary.size() >= 2) {
    const std::size_t target = uniform_index(rng, concepts);
    const std::size_t pick = uniform_index(rng, vocabulary.size() - 1);
    replace_nth(is_concept, target, [&](const Expr& e) {
      std::vector<std::string> others;
      for (const auto& v : vocabulary)
        if (v != e.args[1]->name) others.push_back(v);
      const std::string& chosen = others[std::min(pick, others.size() - 1)];
      return Expr::make_call("mask", {e.args[0], Expr::make_string(chosen)});
    });
    return out;
  }
  if (u < 0.7 && !out.features.empty()) {
    // Change the wrapper of one feature: none, log1p or sqrt.
    auto& f = out.features[uniform_index(rng, out.features.size())];
    const ExprPtr inner = unwrap(f.value);
    const bool was_bare = inner == f.value;
    const std::size_t w = uniform_index(rng, was_bare ? 2 : 3);
    if (was_bare)
      f.value = w == 0 ? log_wrap(inner, rng) : call("sqrt", {inner});
    else
      f.value = w == 0 ? inner : w == 1 ? log_wrap(inner, rng) : call("sqrt", {inner});
    return out;
  }
  // Replace one feature with a fresh random one, or add one.
  Builder b;
  std::map<std::string, std::string> names{{out.param, "loc"}};
  for (const auto& binding : out.bindings) names[binding.name] = b.bind(binding.name, rename(binding.value, names));
  const bool replace = u < 0.85 && !out.features.empty();
  const std::size_t drop = replace ? uniform_index(rng, out.features.size()) : out.features.size();
  for (std::size_t i = 0; i < out.features.size(); ++i)
    if (i != drop) b.feature(out.features[i].name, rename(out.features[i].value, names));
  auto [name, e] = template_feature(b, vocabulary, rng);
  if (!b.has_feature(*e)) b.feature(name, e);
  if (b.program.features.empty()) return out;
  return b.program;
}

FeatureProgram critic_revision(const FeatureProgram& p, const std::vector<std::string>& worst_strata,
                               const std::vector<std::string>& vocabulary, bool single_feature, Rng& rng) {
  std::vector<std::string> targets;
  for (const auto& stratum : worst_strata)
    if (std::find(vocabulary.begin(), vocabulary.end(), stratum) != vocabulary.end()) targets.push_back(stratum);
  if (targets.empty() || p.features.empty()) return p;

  Builder b;
  std::map<std::string, std::string> names{{p.param, "loc"}};
  for (const auto& binding : p.bindings) names[binding.name] = b.bind(binding.name, rename(binding.value, names));
  for (const auto& f : p.features) b.feature(f.name, rename(f.value, names));
  const std::string& stratum = targets[uniform_index(rng, targets.size())];
  auto [name, e] = template_feature(b, vocabulary, rng, &stratum);
  if (single_feature) {
    auto& f = b.program.features.front();
    f.value = Expr::make_binary('+', f.value, Expr::make_binary('*', num(0.5), e));
  } else {
    if (b.has_feature(*e)) return p;
    b.feature(name, e);
  }
  return b.program;
}

}  // namespace recombiner

namespace {

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(' ');
    const auto z = item.find_last_not_of(" \r");
    if (a != std::string::npos) out.push_back(item.substr(a, z - a + 1));
  }
  return out;
}

std::vector<std::string> line_list(const std::string& prompt, std::string_view lead) {
  std::size_t at = 0;
  while ((at = prompt.find(lead, at)) != std::string::npos) {
    if (at == 0 || prompt[at - 1] == '\n') {
      const std::size_t end = prompt.find('\n', at);
      return split_list(std::string_view(prompt).substr(at + lead.size(), end == std::string::npos ? end : end - at - lead.size()));
    }
    at += lead.size();
  }
  return {};
}

std::string wrap(const FeatureProgram& p) { return "Here is the program.\n\n```python\n" + pretty_print(p) + "```\n"; }

bool single_mode(const std::string& prompt) { return prompt.find(kSingleFeatureLine) != std::string::npos; }

}  // namespace

Script recombiner_script(std::shared_ptr<const PrimitiveRegistry> registry, recombiner::Options options) {
  auto parse_blocks = [registry](const std::string& prompt, std::size_t last_n) {
    auto blocks = code_blocks(prompt);
    std::vector<std::optional<FeatureProgram>> out;
    for (std::size_t i = blocks.size() >= last_n ? blocks.size() - last_n : 0; i < blocks.size(); ++i) {
      try {
        out.emplace_back(parse(blocks[i], *registry));
      } catch (const Error&) {
        out.emplace_back(std::nullopt);
      }
    }
    return out;
  };
  Script s;
  s[PromptClass::Objective] = [](const std::string& prompt, Rng& rng) {
    return wrap(recombiner::random_program(line_list(prompt, kVocabularyLead), single_mode(prompt), rng));
  };
  s[PromptClass::Crossover] = [parse_blocks, options](const std::string& prompt, Rng& rng) {
    const auto vocab = line_list(prompt, kVocabularyLead);
    const bool single = single_mode(prompt);
    auto parents = parse_blocks(prompt, 2);
    if (parents.size() == 2 && parents[0] && parents[1])
      return wrap(recombiner::crossover(*parents[0], *parents[1], vocab, single, rng, options));
    for (const auto& p : parents)
      if (p) return wrap(*p);
    return wrap(recombiner::random_program(vocab, single, rng));
  };
  s[PromptClass::Mutation] = [parse_blocks](const std::string& prompt, Rng& rng) {
    const auto vocab = line_list(prompt, kVocabularyLead);
    auto parents = parse_blocks(prompt, 1);
    if (!parents.empty() && parents[0]) return wrap(recombiner::mutate(*parents[0], vocab, rng));
    return wrap(recombiner::random_program(vocab, single_mode(prompt), rng));
  };
  s[PromptClass::Critic] = [parse_blocks](const std::string& prompt, Rng& rng) {
    auto parents = parse_blocks(prompt, 1);
    if (parents.empty() || !parents[0]) return std::string("I cannot read the program.");
    return wrap(recombiner::critic_revision(*parents[0], line_list(prompt, kWorstStrataLead),
                                            line_list(prompt, kVocabularyLead), single_mode(prompt), rng));
  };
  return s;
}

Script constant_script(std::string response) {
  Script s;
  for (auto c : {PromptClass::Objective, PromptClass::Crossover, PromptClass::Mutation, PromptClass::Critic})
    s[c] = [response](const std::string&, Rng&) { return response; };
  return s;
}

}  // namespace geoprog
