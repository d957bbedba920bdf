#include <doctest.h>

#include <cmath>
#include <numeric>

#include "geoprog/dsl/parser.hpp"
#include "geoprog/error.hpp"
#include "geoprog/fitness/candidate.hpp"
#include "geoprog/fitness/regression.hpp"
#include "support.hpp"

using namespace geoprog;
using geoprog::testing::shared_registry;
using geoprog::testing::small_world;

namespace {

double brute_score(MetricId id, const std::vector<double>& p, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double lp = std::log(std::max(p[i], 1e-6)), ly = std::log(std::max(y[i], 1e-6));
    switch (id) {
      case MetricId::L2_LOG: s += (lp - ly) * (lp - ly); break;
      case MetricId::L1_LOG: s += std::abs(lp - ly); break;
      case MetricId::L1: s += std::abs(p[i] - y[i]); break;
      case MetricId::RMSE: s += (p[i] - y[i]) * (p[i] - y[i]); break;
    }
  }
  s /= static_cast<double>(p.size());
  return id == MetricId::RMSE ? std::sqrt(s) : s;
}

}  // namespace

TEST_CASE("metrics match brute force") {
  Rng rng(3);
  for (MetricId id : all_metrics()) {
    const Metric m{id};
    std::vector<double> p(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) p[i] = uniform01(rng) * 4 - 0.5, y[i] = uniform01(rng) * 3 + 0.01;
    CHECK(m.score(p, y) == doctest::Approx(brute_score(id, p, y)).epsilon(1e-12));
    CHECK(m.score(y, y) == 0.0);
    CHECK(parse_metric(metric_name(id)) == id);
  }
  CHECK_THROWS_AS(Metric{}.aggregate({}), EmptySubset);
  CHECK_THROWS_AS(parse_metric("R2"), ConfigError);
}

TEST_CASE("regression head closed form") {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    const double f = 0.3 * i - 1.7;
    rows.push_back({f});
    y.push_back(2 * f + 1);
  }
  const Metric rmse{MetricId::RMSE};
  const auto h = fit_head(rows, y, {"f1"}, rmse);
  CHECK(std::abs(h.raw_weights()[0] - 2.0) < 1e-8);
  CHECK(std::abs(h.raw_intercept() - 1.0) < 1e-8);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(std::abs(h.predict(rows[i]) - y[i]) < 1e-8);

  std::vector<std::vector<double>> dup;
  for (const auto& r : rows) dup.push_back({r[0], r[0]});
  const auto hd = fit_head(dup, y, {"a", "b"}, rmse);
  const auto w = hd.raw_weights();
  CHECK(std::abs(w[0] + w[1] - 2.0) < 1e-6);
  CHECK(std::abs(w[0] - w[1]) < 1e-6);

  std::vector<std::vector<double>> with_const;
  for (const auto& r : rows) with_const.push_back({r[0], 4.0});
  const auto hc = fit_head(with_const, y, {"a", "c"}, rmse);
  CHECK(hc.weights[1] == 0.0);
  CHECK(hc.constant[1]);
  CHECK(hc.feature_stds[1] == 1.0);
  CHECK(std::abs(hc.raw_weights()[0] - 2.0) < 1e-8);

  CHECK_THROWS_AS(fit_head(std::span(rows).first(1), std::span(y).first(1), {"f1"}, rmse), DegenerateFit);
}

TEST_CASE("regression weights match normal-equation oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 40, k = 3;
    std::vector<double> truth{uniform01(rng) * 4 - 2, uniform01(rng) * 4 - 2, uniform01(rng) * 4 - 2};
    const double b = uniform01(rng);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r(k);
      double t = b;
      for (std::size_t j = 0; j < k; ++j) r[j] = uniform01(rng) * (j + 1) * 10, t += truth[j] * r[j];
      rows.push_back(r);
      y.push_back(t);
    }
    const auto h = fit_head(rows, y, {"a", "b", "c"}, Metric{MetricId::L1});
    const auto w = h.raw_weights();
    for (std::size_t j = 0; j < k; ++j) CHECK(std::abs(w[j] - truth[j]) <= 1e-6);
    CHECK(std::abs(h.raw_intercept() - b) <= 1e-6);

    // Scaling a feature leaves predictions unchanged.
    auto scaled = rows;
    for (auto& r : scaled) r[1] *= 37.5;
    const auto hs = fit_head(scaled, y, {"a", "b", "c"}, Metric{MetricId::L1});
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(hs.predict(scaled[i]) - h.predict(rows[i])) <= 1e-9);
  }
}

TEST_CASE("mean predictor on log metric equals variance of log targets") {
  const auto world = small_world(2, 120, 16);
  ObservationSet positive = world;
  for (auto& y : positive.targets) y = std::exp(y);
  const Metric m{MetricId::L2_LOG};
  double mean = 0;
  for (double y : positive.targets) mean += std::log(y);
  mean /= positive.size();
  double var = 0;
  for (double y : positive.targets) var += (std::log(y) - mean) * (std::log(y) - mean);
  var /= positive.size();
  CHECK(std::abs(mean_baseline_score(positive, positive, m) - var) <= 1e-9);

  FitnessContext ctx{.train = &positive, .registry = shared_registry().get(), .metric = m};
  const auto c = fit_candidate(parse("def f(loc): return [(\"c\", 1.0)]", *shared_registry()), ctx);
  REQUIRE(c.valid);
  CHECK(std::abs(c.score_train - var) <= 1e-9);
}

TEST_CASE("fit_candidate on a noiseless world") {
  const auto world = small_world(3, 80, 16);
  const Metric rmse{MetricId::RMSE};
  FitnessContext ctx{.train = &world, .test = &world, .registry = shared_registry().get(), .metric = rmse};
  const auto good =
      fit_candidate(parse("def f(loc): return [(\"r\", area_fraction(mask(loc, \"residential\")))]", *shared_registry()), ctx);
  REQUIRE(good.valid);
  CHECK(good.score_train <= 1e-12);
  CHECK(good.train_predictions.size() == world.size());

  const auto bad = fit_candidate(parse("def f(loc): return [(\"r\", sqrt(-1.0 - area_fraction(mask(loc, \"road\"))))]",
                                       *shared_registry()),
                                 ctx);
  CHECK_FALSE(bad.valid);
  CHECK(bad.score_train == kWorstScore);
  CHECK_FALSE(bad.error.empty());

  const auto mistyped = fit_candidate(parse("def f(loc): return [(\"m\", mask(loc, \"road\"))]", *shared_registry()), ctx);
  CHECK_FALSE(mistyped.valid);
}

TEST_CASE("score is order-invariant and stratified scores recompose") {
  const auto world = small_world(5, 90, 16);
  Rng rng(21);
  for (MetricId id : all_metrics()) {
    const Metric m{id};
    ObservationSet set = world;
    for (auto& y : set.targets) y = std::abs(y) + 0.05;
    std::vector<double> pred(set.size());
    for (auto& p : pred) p = uniform01(rng) + 0.01;
    const double overall = m.score(pred, set.targets);

    std::vector<std::size_t> perm(set.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pp, yy;
    for (auto i : perm) pp.push_back(pred[i]), yy.push_back(set.targets[i]);
    CHECK(std::abs(m.score(pp, yy) - overall) <= 1e-12);

    Partition whole{Partition::Scheme::Custom, {"all"}, {{"all", set.ids()}}};
    CHECK(std::abs(stratified_score(pred, set, whole, m).at("all") - overall) <= 1e-12);

    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t k = 2 + uniform_index(rng, 5);
      Partition part;
      for (std::size_t s = 0; s < k; ++s) part.names.push_back("s" + std::to_string(s)), part.strata["s" + std::to_string(s)];
      for (const auto& id : set.ids()) part.strata["s" + std::to_string(uniform_index(rng, k))].push_back(id);
      const auto scores = stratified_score(pred, set, part, m);
      std::vector<double> sc;
      std::vector<std::size_t> sizes;
      for (const auto& name : part.names) {
        if (part.strata[name].empty()) {
          CHECK(scores.at(name) == kWorstScore);
          continue;
        }
        sc.push_back(scores.at(name));
        sizes.push_back(part.strata[name].size());
      }
      CHECK(std::abs(m.recompose(sc, sizes) - overall) <= 1e-9);
    }
  }
  Partition two{Partition::Scheme::Custom, {"a", "b"}, {{"a", {"x", "y"}}, {"b", {"z", "y"}}}};
  CHECK_THROWS_AS(two.check_covers({"x", "y", "z"}), SchemaError);
}
