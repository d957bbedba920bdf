#include <doctest.h>

#include <cmath>

#include "geoprog/dsl/dag.hpp"
#include "geoprog/dsl/parser.hpp"
#include "geoprog/dsl/printer.hpp"
#include "geoprog/dsl/typecheck.hpp"
#include "geoprog/simplify/simplify.hpp"
#include "support.hpp"

using namespace geoprog;
using geoprog::testing::ProgramGenerator;
using geoprog::testing::shared_registry;
using geoprog::testing::small_world;

namespace {

bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b || std::abs(a - b) <= 1e-12; }

RegressionHead head_with(std::vector<double> weights) {
  RegressionHead h;
  h.weights = std::move(weights);
  for (std::size_t i = 0; i < h.weights.size(); ++i) {
    h.feature_names.push_back("f" + std::to_string(i));
    h.feature_means.push_back(0);
    h.feature_stds.push_back(1);
    h.constant.push_back(false);
  }
  return h;
}

}  // namespace

TEST_CASE("dead binding chain needs two rounds") {
  const auto& reg = *shared_registry();
  const auto p = parse(
      "def f(loc):\n    u1 = mask(loc, \"park\")\n    u2 = area_fraction(u1)\n    t = temperature(loc)\n"
      "    return [(\"t\", t)]\n",
      reg);
  const auto r = dead_code_eliminate_rounds(p);
  CHECK(r.rounds == 2);
  CHECK(r.removed == 2);
  REQUIRE(r.program.bindings.size() == 1);
  CHECK(r.program.bindings[0].name == "t");
  CHECK(typecheck(r.program, reg).ok());

  const auto clean = dead_code_eliminate_rounds(r.program);
  CHECK(clean.rounds == 0);
  CHECK(structurally_equal(clean.program, r.program));
}

TEST_CASE("dead code elimination preserves feature values") {
  const auto world = small_world(21, 32, 16);
  const auto& reg = *shared_registry();
  ProgramGenerator gen(404, world.vocabulary);
  for (int i = 0; i < 100; ++i) {
    auto p = gen.program();
    gen.inject_dead_code(p, 1 + uniform_index(gen.rng(), 3));
    const auto q = dead_code_eliminate(p);
    CHECK(q.bindings.size() < p.bindings.size());
    CHECK(typecheck(q, reg).ok());
    const auto dag = ast_to_dag(q);
    for (NodeId leaf : dag.leaves()) CHECK((leaf == dag.return_node() || leaf == dag.param()));
    for (const auto& in : world.inputs) {
      const auto a = evaluate(p, in, reg, *world.masks);
      const auto b = evaluate(q, in, reg, *world.masks);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) CHECK(same_value(a[k], b[k]));
    }
  }
}

TEST_CASE("prune threshold is strict") {
  CHECK(features_to_prune(head_with({1.0, 0.04}), 0.05) == std::vector<std::size_t>{1});
  CHECK(features_to_prune(head_with({1.0, 0.06}), 0.05).empty());
  CHECK(features_to_prune(head_with({-1.0, 0.05}), 0.05).empty());
  CHECK(features_to_prune(head_with({0.01, -2.0, 0.09}), 0.05) == std::vector<std::size_t>{0, 2});
  CHECK(features_to_prune(head_with({0.0, 0.0}), 0.05).empty());
  CHECK(features_to_prune(head_with({3.0}), 0.05).empty());
}

TEST_CASE("simplify removes dead code and a weak feature") {
  const auto world = small_world(22, 150, 16,
                                 "def h(loc):\n    return [(\"r\", area_fraction(mask(loc, \"residential\")))]\n", 0.01);
  const auto& reg = *shared_registry();
  FitnessContext ctx{.train = &world, .registry = &reg, .metric = Metric{MetricId::RMSE}};
  auto noisy = world;
  Rng rng(1);
  for (auto& in : noisy.inputs) in.scalar_fields["elevation"] = uniform01(rng);
  ctx.train = &noisy;
  const auto c = fit_candidate(parse("def f(loc):\n    u = distance_transform(mask(loc, \"park\"))\n"
                                     "    r = area_fraction(mask(loc, \"residential\"))\n"
                                     "    return [(\"r\", r), (\"noise\", elevation(loc))]\n",
                                     reg),
                               ctx);
  REQUIRE(c.valid);
  const auto s = simplify(c, ctx);
  CHECK(s.program.features.size() == 1);
  CHECK(s.program.features[0].name == "r");
  CHECK(s.program.bindings.size() == 1);
  CHECK(ast_to_dag(c.program).size() - ast_to_dag(s.program).size() >= 2);
  CHECK(s.score_train <= c.score_train * 1.05);
  CHECK(s.last_step() == "simplified");

  const auto again = simplify(s, ctx);
  CHECK(structurally_equal(again.program, s.program));
  CHECK(std::abs(again.score_train - s.score_train) <= 1e-9);
}

TEST_CASE("pruning is reverted when the score regresses") {
  const auto world = small_world(23, 120, 16,
                                 "def h(loc):\n    return [(\"y\", area_fraction(mask(loc, \"residential\")) + "
                                 "0.02 * area_fraction(mask(loc, \"water\")))]\n",
                                 0.0);
  const auto& reg = *shared_registry();
  FitnessContext ctx{.train = &world, .registry = &reg, .metric = Metric{MetricId::RMSE}};
  const auto c = fit_candidate(parse("def f(loc):\n    return [(\"r\", area_fraction(mask(loc, \"residential\"))), "
                                     "(\"w\", area_fraction(mask(loc, \"water\")))]\n",
                                     reg),
                               ctx);
  REQUIRE(c.valid);
  REQUIRE(features_to_prune(c.head, 0.05) == std::vector<std::size_t>{1});
  const auto r = prune_features(c, ctx);
  CHECK(r.reverted);
  CHECK(structurally_equal(r.candidate.program, c.program));
  PruneOptions loose;
  loose.max_relative_regression = 1e300;
  const auto forced = prune_features(c, ctx, loose);
  CHECK_FALSE(forced.reverted);
  CHECK(forced.pruned == std::vector<std::string>{"w"});
}

TEST_CASE("simplify keeps minimal candidates and invalid ones unchanged") {
  const auto world = small_world(24, 80, 16);
  const auto& reg = *shared_registry();
  FitnessContext ctx{.train = &world, .registry = &reg, .metric = Metric{MetricId::RMSE}};
  const auto c = fit_candidate(parse("def f(loc):\n    return [(\"r\", area_fraction(mask(loc, \"residential\")))]\n", reg), ctx);
  const auto s = simplify(c, ctx);
  CHECK(structurally_equal(s.program, c.program));
  CHECK(std::abs(s.score_train - c.score_train) <= 1e-9);

  const auto bad = fit_candidate(parse("def f(loc):\n    return [(\"r\", sqrt(-2.0))]\n", reg), ctx);
  REQUIRE_FALSE(bad.valid);
  CHECK(structurally_equal(simplify(bad, ctx).program, bad.program));
}
