#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoprog/primitives/input.hpp"
#include "geoprog/primitives/value.hpp"

namespace geoprog {

class MaskProvider;

struct Signature {
  std::vector<Kind> args;
  Kind result = Kind::Scalar;

  std::string to_string() const;
};

/// Which literal vocabulary a primitive's Text arguments draw from. Used by
/// prompt builders and random program generators; validation of the literal
/// itself happens at evaluation time.
enum class TextDomain { None, Concept, ScalarField };

/// One primitive argument as seen by an implementation.
struct Operand {
  Kind kind = Kind::Scalar;
  const Value* value = nullptr;  // set for Scalar/Grid/Mask/Bool
  std::string_view text;         // set for Text
};

struct CallContext {
  const InputDescriptor& input;
  const MaskProvider& masks;
};

using PrimitiveFn = std::function<Value(std::span<const Operand>, const CallContext&)>;

struct PrimitiveEntry {
  std::string name;
  std::string description;
  std::vector<Signature> overloads;
  PrimitiveFn fn;
  TextDomain text_domain = TextDomain::None;
};

enum class DistanceMetric { Euclidean, Chebyshev };

struct RegistryOptions {
  DistanceMetric distance = DistanceMetric::Euclidean;
  /// |denominator| below this is replaced by ±epsilon in div.
  double div_epsilon = 1e-9;
};

/// Named, typed primitive functions available to feature programs. Built once
/// at startup and shared read-only afterwards.
class PrimitiveRegistry {
 public:
  PrimitiveRegistry() = default;
  explicit PrimitiveRegistry(RegistryOptions options) : options_(options) {}

  /// Throws std::invalid_argument on duplicate names, empty descriptions,
  /// nullary overloads, or non-value result kinds.
  void add(PrimitiveEntry entry);

  bool contains(std::string_view name) const;
  const PrimitiveEntry& at(std::string_view name) const;
  const PrimitiveEntry* find(std::string_view name) const;

  /// Exact kind match first, then with Mask promoted to Grid. Returns the
  /// index of the chosen overload.
  std::optional<std::size_t> resolve(std::string_view name, std::span<const Kind> args) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const RegistryOptions& options() const { return options_; }

  /// One line per overload: `name(Kind, ...) -> Kind: description`.
  std::string catalog() const;

 private:
  RegistryOptions options_;
  std::map<std::string, PrimitiveEntry, std::less<>> entries_;
};

/// The stock primitive library: concept masks, scalar fields, mask/grid
/// arithmetic, logical ops, reductions and the distance transform.
PrimitiveRegistry default_registry(RegistryOptions options = {});

/// Scalar field names accepted by `scalar_field`.
const std::vector<std::string>& scalar_field_names();

}  // namespace geoprog
