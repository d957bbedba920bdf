#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geoprog/dsl/ast.hpp"
#include "geoprog/dsl/dag.hpp"
#include "geoprog/primitives/cache.hpp"
#include "geoprog/primitives/input.hpp"
#include "geoprog/primitives/raster.hpp"
#include "geoprog/primitives/registry.hpp"

namespace geoprog {

struct EvalLimits {
  /// Primitive-cell operations allowed per observation.
  std::uint64_t step_budget = 1'000'000;
  std::chrono::milliseconds timeout{2000};
  /// A program failing on more than this fraction of observations is invalid.
  double max_error_rate = 0.01;
};

struct EvalEnv {
  const PrimitiveRegistry* registry = nullptr;
  const MaskProvider* masks = nullptr;
  PrimitiveCache* cache = nullptr;  // optional
  EvalLimits limits;
  unsigned threads = 1;
};

/// Replacement values for DAG nodes, used for ablation.
using NodeOverrides = std::map<NodeId, Value>;

/// A typechecked program lowered onto its DAG with resolved overloads and
/// canonical cache keys. Immutable and shareable across threads.
class CompiledProgram {
 public:
  /// Throws TypeCheckFailed.
  CompiledProgram(FeatureProgram program, const PrimitiveRegistry& registry);

  const FeatureProgram& program() const { return *program_; }
  const ProgramDag& dag() const { return dag_; }
  std::size_t feature_count() const { return program_->features.size(); }
  std::vector<std::string> feature_names() const { return dag_.feature_names(); }

  Kind node_kind(NodeId id) const { return nodes_[id].kind; }
  /// Canonical text of the value a node computes (bindings inlined, the
  /// parameter written as `$`).
  const std::string& node_key(NodeId id) const { return nodes_[id].key; }

  /// Static per-observation step cost for rasters of `cells` cells.
  std::uint64_t step_cost(std::size_t cells) const;

  /// Feature vector for one observation. Lazy: only nodes the return
  /// statement depends on are evaluated. Throws RuntimeError subclasses.
  std::vector<double> evaluate(const InputDescriptor& input, const EvalEnv& env,
                               const NodeOverrides* overrides = nullptr) const;

  /// Values of `nodes` (which must be value-kinded) for one observation.
  std::vector<Value> node_values(const InputDescriptor& input, const EvalEnv& env, std::span<const NodeId> nodes) const;

 private:
  struct NodeInfo {
    Kind kind = Kind::Scalar;
    const PrimitiveEntry* entry = nullptr;
    std::string key;
    std::string text;  // Text-kinded nodes
    std::shared_ptr<const Value> literal;
    bool raster_cost = false;
  };

  class Run;

  std::shared_ptr<const FeatureProgram> program_;
  ProgramDag dag_;
  std::vector<NodeInfo> nodes_;
  std::vector<bool> live_;
  bool uses_rasters_ = false;
};

/// Per-observation outcome of evaluating a program over a dataset.
struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;  // empty row when evaluation failed
  std::vector<std::string> errors;        // empty string when evaluation succeeded

  std::size_t size() const { return rows.size(); }
  bool ok(std::size_t i) const { return errors[i].empty(); }
  std::size_t failures() const;
  double error_rate() const;
  /// First non-empty error message, or "".
  std::string first_error() const;
};

FeatureTable evaluate_table(const CompiledProgram& program, std::span<const InputDescriptor> inputs, const EvalEnv& env,
                            const NodeOverrides* overrides = nullptr);

/// Compiles `program` and evaluates one observation without a cache.
std::vector<double> evaluate(const FeatureProgram& program, const InputDescriptor& input,
                             const PrimitiveRegistry& registry, const MaskProvider& masks,
                             const EvalLimits& limits = {});

}  // namespace geoprog
