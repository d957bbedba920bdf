#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "geoprog/dsl/parser.hpp"
#include "geoprog/dsl/printer.hpp"
#include "geoprog/dsl/typecheck.hpp"
#include "geoprog/error.hpp"
#include "geoprog/llm/extract.hpp"
#include "geoprog/llm/http_backend.hpp"
#include "geoprog/llm/prompts.hpp"
#include "geoprog/llm/scripted.hpp"
#include "support.hpp"

using namespace geoprog;
using geoprog::testing::shared_registry;

namespace {

const std::vector<std::string> kVocab = {"road", "water", "residential", "forest"};

Candidate candidate(const std::string& source, double score) {
  Candidate c;
  c.program = parse(source, *shared_registry());
  c.valid = true;
  c.score_train = score;
  return c;
}

Candidate from_program(FeatureProgram p, double score) {
  Candidate c;
  c.program = std::move(p);
  c.valid = true;
  c.score_train = score;
  return c;
}

std::vector<double> numbers_of(const FeatureProgram& p) {
  std::vector<double> out;
  auto collect = [&](const Expr& e) {
    walk(e, [&](const Expr& x) {
      if (x.type == Expr::Type::Number) out.push_back(x.number);
    });
  };
  for (const auto& b : p.bindings) collect(*b.value);
  for (const auto& f : p.features) collect(*f.value);
  return out;
}

const char* kValid = "def f(loc):\n    return [(\"w\", area_fraction(mask(loc, \"water\")))]\n";

}  // namespace

TEST_CASE("objective prompt") {
  const auto& reg = *shared_registry();
  const auto prompt = build_objective_prompt("population density", reg, kVocab);
  CHECK(prompt.find("Given a satellite image, write a function to estimate population density") != std::string::npos);
  CHECK(prompt.find(grammar_blurb()) != std::string::npos);
  CHECK(prompt.find(reg.at("distance_transform").description) != std::string::npos);
  CHECK(prompt.find(std::string(kVocabularyLead) + "road, water") != std::string::npos);
  CHECK_FALSE(has_placeholder(prompt));

  const PrimitiveRegistry empty;
  const auto bare = build_objective_prompt("tree cover", empty);
  CHECK(bare.find("estimate tree cover") != std::string::npos);
  CHECK_FALSE(has_placeholder(bare));

  const auto bundle = make_prompt_bundle("population density", reg, kVocab);
  for (const auto* t : {&bundle.objective}) CHECK_FALSE(has_placeholder(*t));
  CHECK(classify_prompt(build_initial_prompt(bundle)) == PromptClass::Objective);
}

TEST_CASE("templates and helpers") {
  CHECK(render_template("a {x} b {y}", {{"x", "1"}, {"y", "{z}"}}) == "a 1 b {z}");
  CHECK_THROWS_AS(render_template("{missing}", {}), ConfigError);
  CHECK(render_template("{ not a placeholder }", {}) == "{ not a placeholder }");
  CHECK(has_placeholder("x {y} z"));
  CHECK_FALSE(has_placeholder("x { y } z"));
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens("abcde") == 2);
  CHECK(format_score(0.123456) == "0.1235");
  CHECK(format_score(2.0) == "2.0000");
  CHECK(format_score(kWorstScore) == "inf");
}

TEST_CASE("crossover and mutation prompts carry parents, scores and objective") {
  const auto bundle = make_prompt_bundle("population density", *shared_registry(), kVocab);
  const auto a = candidate("def f(loc): r = mask(loc, \"road\"); return [(\"r\", area_fraction(r))]", 0.123456);
  const auto b = candidate("def g(loc): return [(\"t\", temperature(loc)), (\"k\", 2.0)]", 1.5);
  const auto x = build_crossover_prompt(a, b, bundle);
  CHECK(classify_prompt(x) == PromptClass::Crossover);
  CHECK(x.find(pretty_print(a.program)) != std::string::npos);
  CHECK(x.find(pretty_print(b.program)) != std::string::npos);
  CHECK(x.find("0.1235") != std::string::npos);
  CHECK(x.find("1.5000") != std::string::npos);
  CHECK(x.find(bundle.objective) != std::string::npos);
  CHECK_FALSE(has_placeholder(x));

  const auto m = build_mutation_prompt(a, bundle);
  CHECK(classify_prompt(m) == PromptClass::Mutation);
  CHECK(m.find(pretty_print(a.program)) != std::string::npos);
  CHECK(m.find("0.1235") != std::string::npos);
  CHECK(m.find(bundle.objective) != std::string::npos);

  const auto c = build_critic_prompt(a, {{"water", 0.9, 4}, {"road", 0.5, 10}, {"forest", 0.1, 3}}, 2, bundle);
  CHECK(classify_prompt(c) == PromptClass::Critic);
  CHECK(c.find(std::string(kWorstStrataLead) + "water, road") != std::string::npos);
  CHECK(c.find(bundle.objective) != std::string::npos);
  CHECK_THROWS_AS(classify_prompt("hello"), UnclassifiablePrompt);
}

TEST_CASE("over-budget parents are shrunk to fit") {
  auto bundle = make_prompt_bundle("population density", *shared_registry(), kVocab);
  std::string big = "def f(loc):\n";
  for (int i = 0; i < 60; ++i) big += "    b" + std::to_string(i) + " = area_fraction(mask(loc, \"road\"))\n";
  big += "    return [\n";
  for (int i = 0; i < 30; ++i) big += "        (\"f" + std::to_string(i) + "\", b" + std::to_string(i) + "),\n";
  big += "    ]\n";
  const auto a = candidate(big, 0.5), b = candidate(big, 0.7);
  const auto small = build_crossover_prompt(candidate(kValid, 0.1), candidate(kValid, 0.2), bundle);
  bundle.options.max_prompt_tokens = estimate_tokens(small) + 200;
  const auto x = build_crossover_prompt(a, b, bundle);
  CHECK(estimate_tokens(x) <= bundle.options.max_prompt_tokens);
  CHECK(x.find("omitted") != std::string::npos);
  CHECK(x.find("(\"f0\", b0)") != std::string::npos);
  const auto m = build_mutation_prompt(a, bundle);
  CHECK(estimate_tokens(m) <= bundle.options.max_prompt_tokens);
  CHECK(x.find(bundle.objective) != std::string::npos);
}

TEST_CASE("code block extraction") {
  const auto& reg = *shared_registry();
  CHECK(last_code_block("no fences") == "no fences");
  CHECK(last_code_block("x\n```python\nA\n```\ny\n```\nB\n```\n") == "B\n");
  CHECK(code_blocks("```\nA\n```\n```py\nB\n```").size() == 2);

  const std::string decoy = "def f(loc):\n    return [(\"d\", 1.0)]\n";
  const auto p = extract_program("Here:\n```python\n" + decoy + "```\nBetter:\n```python\n" + kValid + "```\n", reg);
  CHECK(structurally_equal(p, parse(kValid, reg)));
  CHECK_THROWS_AS(extract_program("I cannot help with that.", reg), ExtractionFailed);
  CHECK_THROWS_AS(extract_program("```\ndef f(loc):\n    return [(\"m\", mask(loc, \"road\"))]\n```", reg),
                  ExtractionFailed);
}

TEST_CASE("request_program retries with the error appended") {
  const auto& reg = *shared_registry();
  ScriptedBackend prose(constant_script("I would rather describe it in words."), 1);
  std::vector<Exchange> log;
  RequestOptions opts;
  opts.kind = "objective";
  CHECK_THROWS_AS(request_program(prose, "### TASK: WRITE PROGRAM\nplease", reg, opts, &log), ExtractionFailed);
  REQUIRE(log.size() == 3);
  CHECK(log[0].attempt == 1);
  CHECK(log[2].attempt == 3);
  CHECK(log[1].prompt.size() > log[0].prompt.size());
  CHECK_FALSE(log[0].error.empty());
  CHECK(log[0].seed != log[1].seed);

  ScriptedBackend good(constant_script(std::string("```\n") + kValid + "```"), 1);
  log.clear();
  const auto p = request_program(good, "### TASK: WRITE PROGRAM\nplease", reg, opts, &log);
  CHECK(log.size() == 1);
  CHECK(log[0].error.empty());
  CHECK(p.features.size() == 1);
}

TEST_CASE("scripted backend is deterministic and requires a full script") {
  const auto bundle = make_prompt_bundle("density", *shared_registry(), kVocab);
  const auto prompt = build_initial_prompt(bundle);
  ScriptedBackend a(recombiner_script(shared_registry()), 5), b(recombiner_script(shared_registry()), 5);
  const Sampling s{0.8, 1024, 42};
  CHECK(a.complete(prompt, s) == b.complete(prompt, s));
  CHECK(a.complete(prompt, s) == a.complete(prompt, s));
  std::set<std::string> distinct;
  for (std::uint64_t seed = 0; seed < 20; ++seed) distinct.insert(a.complete(prompt, {0.8, 1024, seed}));
  CHECK(distinct.size() > 5);

  Script partial = constant_script("x");
  partial.erase(PromptClass::Critic);
  CHECK_THROWS_AS(ScriptedBackend(partial, 0), ConfigError);
  CHECK_THROWS_AS(a.complete("no marker", s), UnclassifiablePrompt);
}

TEST_CASE("recombiner crossover responses typecheck") {
  const auto& reg = *shared_registry();
  const auto bundle = make_prompt_bundle("density", reg, kVocab);
  ScriptedBackend backend(recombiner_script(shared_registry()), 9);
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const auto p1 = from_program(recombiner::random_program(kVocab, false, rng), uniform01(rng));
    const auto p2 = from_program(recombiner::random_program(kVocab, false, rng), uniform01(rng));
    const auto response = backend.complete(build_crossover_prompt(p1, p2, bundle), {0.8, 1024, rng()});
    const auto child = extract_program(response, reg);
    CHECK(typecheck(child, reg).ok());
    CHECK(child.features.size() <= recombiner::Options{}.max_features);
  }
}

TEST_CASE("recombiner mutation scales one constant by 1.1 or 0.9") {
  const auto& reg = *shared_registry();
  const auto bundle = make_prompt_bundle("density", reg, kVocab);
  ScriptedBackend backend(recombiner_script(shared_registry()), 9);
  const auto parent = candidate(
      "def f(loc):\n    d = distance_transform(mask(loc, \"road\"))\n"
      "    return [(\"a\", area_fraction(threshold(d, 5.0))), (\"b\", log1p(mean(d) / 2.5))]\n",
      0.3);
  const auto before = numbers_of(parent.program);
  int up = 0, down = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto child = extract_program(backend.complete(build_mutation_prompt(parent, bundle), {0.8, 1024, seed}), reg);
    const auto after = numbers_of(child);
    REQUIRE(after.size() == before.size());
    int changed = 0;
    for (std::size_t k = 0; k < before.size(); ++k) {
      if (after[k] == before[k]) continue;
      ++changed;
      if (after[k] == before[k] * 1.1) ++up;
      else if (after[k] == before[k] * 0.9) ++down;
      else FAIL("constant changed by an unexpected factor: " << before[k] << " -> " << after[k]);
    }
    CHECK(changed == 1);
  }
  CHECK(up > 0);
  CHECK(down > 0);
}

TEST_CASE("critic revision targets a worst stratum") {
  const auto& reg = *shared_registry();
  const auto p = parse(kValid, reg);
  Rng rng(2);
  for (int i = 0; i < 30; ++i) {
    const auto r = recombiner::critic_revision(p, {"forest"}, kVocab, false, rng);
    CHECK(typecheck(r, reg).ok());
    if (structurally_equal(r, p)) continue;
    CHECK(pretty_print(r).find("\"forest\"") != std::string::npos);
  }
  const auto same = recombiner::critic_revision(p, {"bare_ground"}, kVocab, false, rng);
  CHECK(structurally_equal(same, p));
}

TEST_CASE("http backend speaks chat completions") {
  httplib::Server server;
  std::atomic<int> calls{0};
  nlohmann::json seen;
  std::mutex mu;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    {
      std::lock_guard lock(mu);
      seen = nlohmann::json::parse(req.body);
    }
    if (req.get_header_value("Authorization") != "Bearer secret") {
      res.status = 401;
      return;
    }
    nlohmann::json out{{"choices", {{{"message", {{"role", "assistant"}, {"content", "reply text"}}}}}}};
    res.set_content(out.dump(), "application/json");
  });
  server.Post("/broken", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.model = "test-model";
  cfg.api_key = "secret";
  cfg.timeout_s = 5;
  HttpBackend backend(cfg);
  CHECK(backend.complete("hello", {0.2, 77, 13}) == "reply text");
  {
    std::lock_guard lock(mu);
    CHECK(seen["model"] == "test-model");
    CHECK(seen["messages"][0]["role"] == "user");
    CHECK(seen["messages"][0]["content"] == "hello");
    CHECK(seen["temperature"] == 0.2);
    CHECK(seen["max_tokens"] == 77);
    CHECK(seen["seed"] == 13);
  }

  calls = 0;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/broken";
  cfg.retries = 2;
  HttpBackend broken(cfg);
  CHECK_THROWS_AS(broken.complete("x", {}), BackendError);
  CHECK(calls == 3);

  CHECK_THROWS_AS(HttpBackend(HttpBackendConfig{"not a url", "", "", 1, 0}), ConfigError);
  server.stop();
  th.join();
}
