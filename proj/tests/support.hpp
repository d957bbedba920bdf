#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "geoprog/data/synthetic.hpp"
#include "geoprog/dsl/ast.hpp"
#include "geoprog/primitives/raster.hpp"
#include "geoprog/primitives/registry.hpp"
#include "geoprog/util/rng.hpp"

namespace geoprog::testing {

inline std::shared_ptr<const PrimitiveRegistry> shared_registry() {
  static const auto registry = std::make_shared<const PrimitiveRegistry>(default_registry());
  return registry;
}

// O(n^2) nearest-set-cell distance.
inline Grid brute_force_distance(const Mask& m) {
  Grid out(m.width, m.height, static_cast<double>(m.width + m.height));
  for (std::size_t y = 0; y < m.height; ++y)
    for (std::size_t x = 0; x < m.width; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < m.height; ++v)
        for (std::size_t u = 0; u < m.width; ++u)
          if (m.at(u, v)) {
            const double dx = static_cast<double>(x) - static_cast<double>(u);
            const double dy = static_cast<double>(y) - static_cast<double>(v);
            best = std::min(best, std::sqrt(dx * dx + dy * dy));
          }
      if (std::isfinite(best)) out.at(x, y) = best;
    }
  return out;
}

inline Mask random_mask(std::size_t w, std::size_t h, double density, Rng& rng) {
  Mask m(w, h);
  for (auto& c : m.cells) c = uniform01(rng) < density ? 1 : 0;
  return m;
}

// Kind-correct random programs. With `total` set, only operations that are
// defined on every input are used, so evaluation never fails.
class ProgramGenerator {
 public:
  ProgramGenerator(std::uint64_t seed, std::vector<std::string> vocabulary, bool total = true)
      : rng_(seed), vocabulary_(std::move(vocabulary)), total_(total) {}

  FeatureProgram program(std::size_t max_bindings = 4, std::size_t max_features = 3) {
    vars_.clear();
    FeatureProgram p;
    p.name = "g";
    p.param = "loc";
    const std::size_t nb = uniform_index(rng_, max_bindings + 1);
    static const Kind kBindingKinds[] = {Kind::Mask, Kind::Grid, Kind::Scalar, Kind::Bool};
    for (std::size_t i = 0; i < nb; ++i) {
      const Kind k = kBindingKinds[uniform_index(rng_, 4)];
      const std::string name = "b" + std::to_string(i);
      p.bindings.push_back({name, expr(k, 3), {}});
      vars_.push_back({name, k});
    }
    const std::size_t nf = 1 + uniform_index(rng_, max_features);
    for (std::size_t i = 0; i < nf; ++i) p.features.push_back({"f" + std::to_string(i), expr(Kind::Scalar, 3), {}});
    return p;
  }

  // Appends unused bindings to the program last returned by program(), some
  // of them chained on each other.
  void inject_dead_code(FeatureProgram& p, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      static const Kind kKinds[] = {Kind::Mask, Kind::Grid, Kind::Scalar};
      const Kind k = kKinds[uniform_index(rng_, 3)];
      const std::string name = "dead" + std::to_string(i);
      p.bindings.push_back({name, expr(k, 2), {}});
      vars_.push_back({name, k});
    }
  }

  Rng& rng() { return rng_; }

 private:
  struct Var {
    std::string name;
    Kind kind;
  };

  ExprPtr call(std::string name, std::vector<ExprPtr> args) { return Expr::make_call(std::move(name), std::move(args)); }
  ExprPtr loc() { return Expr::make_var("loc"); }
  ExprPtr number() {
    static const double kNumbers[] = {0.0, 0.5, 1.0, 2.0, 3.25, 10.0, 0.125, 1e-3, 7.0, 1.5e3};
    const double v = kNumbers[uniform_index(rng_, 10)];
    return Expr::make_number(uniform01(rng_) < 0.2 ? -v : v);
  }
  ExprPtr concept_mask() {
    return call("mask", {loc(), Expr::make_string(vocabulary_[uniform_index(rng_, vocabulary_.size())])});
  }
  ExprPtr var_of(Kind k) {
    std::vector<const Var*> matches;
    for (const auto& v : vars_)
      if (v.kind == k) matches.push_back(&v);
    if (matches.empty()) return nullptr;
    return Expr::make_var(matches[uniform_index(rng_, matches.size())]->name);
  }
  ExprPtr nonneg(ExprPtr e) { return total_ ? call("abs", {std::move(e)}) : e; }

  ExprPtr expr(Kind k, int depth) {
    if (uniform01(rng_) < 0.3)
      if (auto v = var_of(k)) return v;
    const bool leaf = depth <= 0 || uniform01(rng_) < 0.25;
    switch (k) {
      case Kind::Scalar: {
        if (leaf) {
          switch (uniform_index(rng_, 3)) {
            case 0: return number();
            case 1: {
              static const char* kFields[] = {"temperature", "precipitation", "nightlight", "elevation"};
              const char* f = kFields[uniform_index(rng_, 4)];
              return uniform01(rng_) < 0.5 ? call(f, {loc()}) : call("scalar_field", {loc(), Expr::make_string(f)});
            }
            default: return call("area_fraction", {concept_mask()});
          }
        }
        switch (uniform_index(rng_, 11)) {
          case 0: return call("area_fraction", {expr(Kind::Mask, depth - 1)});
          case 1: return call("mean", {expr(Kind::Grid, depth - 1)});
          case 2: return call(uniform01(rng_) < 0.5 ? "max" : "min", {expr(Kind::Grid, depth - 1)});
          case 3: return call("sum", {expr(Kind::Grid, depth - 1)});
          case 4: {
            static const char kOps[] = {'+', '-', '*', '/'};
            return Expr::make_binary(kOps[uniform_index(rng_, 4)], expr(Kind::Scalar, depth - 1),
                                     expr(Kind::Scalar, depth - 1));
          }
          case 5: return Expr::make_negate(expr(Kind::Scalar, depth - 1));
          case 6: return call("sqrt", {nonneg(expr(Kind::Scalar, depth - 1))});
          case 7: return call("log1p", {nonneg(expr(Kind::Scalar, depth - 1))});
          case 8:
            return call("where", {expr(Kind::Bool, depth - 1), expr(Kind::Scalar, depth - 1),
                                  expr(Kind::Scalar, depth - 1)});
          case 9:
            return call(uniform01(rng_) < 0.5 ? "max" : "min",
                        {expr(Kind::Scalar, depth - 1), expr(Kind::Scalar, depth - 1)});
          default: return call("mul", {expr(Kind::Scalar, depth - 1), expr(Kind::Scalar, depth - 1)});
        }
      }
      case Kind::Grid: {
        if (leaf) return call("distance_transform", {concept_mask()});
        switch (uniform_index(rng_, 7)) {
          case 0: return call("distance_transform", {expr(Kind::Mask, depth - 1)});
          case 1: return Expr::make_binary('+', expr(Kind::Grid, depth - 1), expr(Kind::Scalar, depth - 1));
          case 2: return call("min", {expr(Kind::Grid, depth - 1), expr(Kind::Scalar, depth - 1)});
          case 3: return call("sqrt", {nonneg(expr(Kind::Grid, depth - 1))});
          case 4:
            return call("where", {expr(Kind::Mask, depth - 1), expr(Kind::Grid, depth - 1),
                                  expr(Kind::Grid, depth - 1)});
          case 5: return Expr::make_binary('*', expr(Kind::Scalar, depth - 1), expr(Kind::Grid, depth - 1));
          default: return call("max", {expr(Kind::Grid, depth - 1), expr(Kind::Grid, depth - 1)});
        }
      }
      case Kind::Mask: {
        if (leaf) return concept_mask();
        switch (uniform_index(rng_, 4)) {
          case 0: return call("threshold", {expr(Kind::Grid, depth - 1), number()});
          case 1: return call("and", {expr(Kind::Mask, depth - 1), expr(Kind::Mask, depth - 1)});
          case 2: return call("or", {expr(Kind::Mask, depth - 1), expr(Kind::Mask, depth - 1)});
          default: return call("not", {expr(Kind::Mask, depth - 1)});
        }
      }
      case Kind::Bool: {
        if (leaf) return Expr::make_bool(uniform01(rng_) < 0.5);
        switch (uniform_index(rng_, 3)) {
          case 0: return call("greater", {expr(Kind::Scalar, depth - 1), expr(Kind::Scalar, depth - 1)});
          case 1: return call("not", {expr(Kind::Bool, depth - 1)});
          default: return call("or", {expr(Kind::Bool, depth - 1), expr(Kind::Bool, depth - 1)});
        }
      }
      default: return number();
    }
  }

  Rng rng_;
  std::vector<std::string> vocabulary_;
  bool total_;
  std::vector<Var> vars_;
};

// A small synthetic world for tests that need real rasters.
inline ObservationSet small_world(std::uint64_t seed = 3, std::size_t n = 60, std::size_t tile = 16,
                                  const std::string& hidden = "def h(loc):\n    return [(\"r\", area_fraction(mask(loc, "
                                                              "\"residential\")))]\n",
                                  double noise = 0.0) {
  SyntheticWorldSpec spec;
  spec.seed = seed;
  spec.n_obs = n;
  spec.tile_size = tile;
  spec.hidden_source = hidden;
  spec.noise_sigma = noise;
  return generate_synthetic_world(spec, *shared_registry());
}

}  // namespace geoprog::testing
