#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "geoprog/data/synthetic.hpp"
#include "geoprog/dsl/evaluator.hpp"
#include "geoprog/dsl/parser.hpp"
#include "geoprog/error.hpp"
#include "geoprog/primitives/distance.hpp"
#include "support.hpp"

using namespace geoprog;
using geoprog::testing::brute_force_distance;
using geoprog::testing::random_mask;
using geoprog::testing::shared_registry;

namespace {

const InputDescriptor kInput{"o", 0.0, 0.0, "tile", {{"elevation", 120.0}, {"temperature", 9.0}}};

struct Fixture {
  InMemoryMaskProvider masks{{"water", "road"}};
  Fixture() {
    auto r = std::make_shared<Raster>();
    r->width = 8;
    r->height = 4;
    r->channel_names = {"water", "road"};
    std::vector<std::uint8_t> water(32, 0), road(32, 0);
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 4; ++x) water[y * 8 + x] = 1;
    road[3] = 1;
    r->channels = {water, road};
    masks.insert("tile", r);
  }

  Value call(const std::string& name, const std::vector<Value>& args, const std::string& text = "") const {
    std::vector<Operand> ops;
    for (const auto& a : args) ops.push_back({a.kind(), &a, {}});
    if (!text.empty()) ops.push_back({Kind::Text, nullptr, text});
    return shared_registry()->at(name).fn(ops, CallContext{kInput, masks});
  }
  Value call_input(const std::string& name, const std::string& text) const {
    std::vector<Operand> ops{{Kind::Input, nullptr, {}}, {Kind::Text, nullptr, text}};
    return shared_registry()->at(name).fn(ops, CallContext{kInput, masks});
  }
};

}  // namespace

TEST_CASE("registry entries are described and well formed") {
  const auto& reg = *shared_registry();
  CHECK(reg.size() > 20);
  for (const auto& name : reg.names()) {
    const auto& e = reg.at(name);
    CHECK_FALSE(e.description.empty());
    for (const auto& sig : e.overloads) {
      CHECK_FALSE(sig.args.empty());
      CHECK(sig.result != Kind::Input);
      CHECK(sig.result != Kind::Text);
    }
  }
  PrimitiveRegistry r;
  r.add({"one", "constant", {{{Kind::Scalar}, Kind::Scalar}}, [](auto, const auto&) { return Value(1.0); }, {}});
  CHECK_THROWS_AS(r.add({"one", "again", {{{Kind::Scalar}, Kind::Scalar}}, nullptr, {}}), std::invalid_argument);
  CHECK_THROWS_AS(r.add({"two", "", {{{Kind::Scalar}, Kind::Scalar}}, nullptr, {}}), std::invalid_argument);
}

TEST_CASE("mask reads the channel and rejects unknown concepts") {
  Fixture f;
  const Mask m = f.call_input("mask", "water").mask();
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 8; ++x) CHECK(m.at(x, y) == (x < 4 ? 1 : 0));
  CHECK_THROWS_AS(f.call_input("mask", "dragon_lair"), UnknownConcept);
}

TEST_CASE("area_fraction") {
  Fixture f;
  CHECK(f.call("area_fraction", {Value(Mask(5, 5, 1))}).scalar() == 1.0);
  CHECK(f.call("area_fraction", {Value(Mask(5, 5, 0))}).scalar() == 0.0);
  Mask m(64, 64);
  Rng rng(1);
  std::vector<std::size_t> idx(64 * 64);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (std::size_t i = 0; i < 1024; ++i) m.cells[idx[i]] = 1;
  CHECK(f.call("area_fraction", {Value(m)}).scalar() == 0.25);
}

TEST_CASE("distance transform examples") {
  Mask m(8, 8);
  m.at(0, 0) = 1;
  CHECK(distance_transform(m).at(3, 4) == 5.0);
  const Grid zeros = distance_transform(Mask(6, 5, 1));
  CHECK(zeros == Grid(6, 5, 0.0));
  const Grid empty = distance_transform(Mask(6, 5, 0));
  CHECK(empty == Grid(6, 5, 11.0));
  const Grid cheb = distance_transform(m, DistanceMetric::Chebyshev);
  CHECK(cheb.at(3, 4) == 4.0);
}

TEST_CASE("distance transform matches brute force on random masks") {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const std::size_t w = 1 + uniform_index(rng, 32), h = 1 + uniform_index(rng, 32);
    const Mask m = random_mask(w, h, uniform01(rng) * 0.3, rng);
    REQUIRE(distance_transform(m) == brute_force_distance(m));
  }
}

TEST_CASE("mean of distance transform matches brute force") {
  Fixture f;
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const Mask m = random_mask(16, 16, 0.1, rng);
    const Grid g = brute_force_distance(m);
    const double oracle = std::accumulate(g.cells.begin(), g.cells.end(), 0.0) / 256.0;
    CHECK(f.call("mean", {f.call("distance_transform", {Value(m)})}).scalar() == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("elementwise ops") {
  Fixture f;
  CHECK(f.call("max", {Value(Grid(3, 3, 2.0)), Value(Grid(3, 3, 5.0))}).grid() == Grid(3, 3, 5.0));
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const Mask a = random_mask(9, 7, 0.5, rng), b = random_mask(9, 7, 0.5, rng);
    CHECK(f.call("and", {Value(a), f.call("not", {Value(a)})}).mask() == Mask(9, 7, 0));
    const double fab = f.call("area_fraction", {f.call("and", {Value(a), Value(b)})}).scalar();
    CHECK(fab <= std::min(f.call("area_fraction", {Value(a)}).scalar(), f.call("area_fraction", {Value(b)}).scalar()));
  }
  CHECK(f.call("add", {Value(2.0), Value(3.0)}).scalar() == 5.0);
  CHECK(f.call("div", {Value(1.0), Value(0.0)}).scalar() == doctest::Approx(1e9));
  CHECK(f.call("sum", {Value(Grid(2, 2, 1.5))}).scalar() == 6.0);
  CHECK(f.call("max", {Value(Grid(2, 1, 0.0))}).scalar() == 0.0);
  const Mask t = f.call("threshold", {Value(Grid(2, 1, 3.0)), Value(2.0)}).mask();
  CHECK(t == Mask(2, 1, 1));
  CHECK_THROWS_AS(f.call("sqrt", {Value(-1.0)}), DomainError);
  CHECK(f.call("log1p", {Value(0.0)}).scalar() == 0.0);
  CHECK(f.call("mul", {Value(Mask(2, 2, 1)), Value(3.0)}).grid() == Grid(2, 2, 3.0));
  CHECK_THROWS_AS(f.call("add", {Value(Grid(2, 2)), Value(Grid(3, 2))}), ShapeMismatch);
}

TEST_CASE("scalar fields") {
  Fixture f;
  CHECK(f.call_input("scalar_field", "elevation").scalar() == 120.0);
  CHECK_THROWS_AS(f.call_input("scalar_field", "rainfall"), UnknownField);
  CHECK_THROWS_AS(f.call_input("scalar_field", "precipitation"), UnknownField);

  const auto world = geoprog::testing::small_world(5, 20, 8);
  const SyntheticClimate climate;
  for (const auto& in : world.inputs)
    CHECK(in.scalar_fields.at("temperature") ==
          doctest::Approx(synthetic_temperature(climate, in.latitude, in.scalar_fields.at("elevation"))).epsilon(1e-12));
}

TEST_CASE("DGRD round trip and format errors") {
  Raster r;
  r.width = 5;
  r.height = 3;
  r.channel_names = {"a", "bb"};
  Rng rng(3);
  for (int c = 0; c < 2; ++c) r.channels.push_back(random_mask(5, 3, 0.5, rng).cells);
  r.float_names = {"h"};
  r.float_channels = {std::vector<float>(15, 1.25f)};
  const auto bytes = encode_dgrd(r);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "DGRD");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 5);
  CHECK(decode_dgrd(bytes) == r);

  r.float_names.clear();
  r.float_channels.clear();
  const auto plain = encode_dgrd(r);
  // header 18 + names (2+1, 2+2) + 2 channels of 15 bytes
  CHECK(plain.size() == 18 + 3 + 4 + 30);
  CHECK(decode_dgrd(plain) == r);

  auto bad = plain;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_dgrd(bad), RasterFormatError);
  CHECK_THROWS_AS(decode_dgrd(std::span(plain).first(plain.size() - 1)), RasterFormatError);
  bad = plain;
  bad.back() = 7;
  CHECK_THROWS_AS(decode_dgrd(bad), RasterFormatError);

  const auto path = std::filesystem::temp_directory_path() / "geoprog_test_tile.dgrd";
  write_file_atomic(path, bytes);
  CHECK(read_file_bytes(path) == bytes);
  std::filesystem::remove(path);
}

TEST_CASE("cache counts hits and stays transparent") {
  Fixture f;
  const auto& reg = *shared_registry();
  const CompiledProgram prog(parse("def f(loc): return [(\"w\", area_fraction(mask(loc, \"water\")))]", reg), reg);
  PrimitiveCache cache;
  EvalEnv env{&reg, &f.masks, &cache, {}, 1};
  const auto a = prog.evaluate(kInput, env);
  const auto hits = cache.hits();
  const auto b = prog.evaluate(kInput, env);
  CHECK(cache.hits() >= hits + 1);
  CHECK(a == b);
  EvalEnv plain{&reg, &f.masks, nullptr, {}, 1};
  CHECK(prog.evaluate(kInput, plain) == a);

  PrimitiveCache tiny(16);
  tiny.put("o", "k", std::make_shared<const Value>(Grid(8, 8)));
  tiny.put("o", "s", std::make_shared<const Value>(1.0));
  tiny.evict_if_over_cap();
  CHECK(tiny.get("o", "s") != nullptr);
  CHECK(tiny.get("o", "k") == nullptr);
}
