#pragma once

#include <string>
#include <vector>

#include "geoprog/dsl/ast.hpp"
#include "geoprog/primitives/registry.hpp"

namespace geoprog {

struct TypeIssue {
  std::string message;
  SourcePos pos;
};

struct TypeCheckResult {
  std::vector<TypeIssue> errors;

  bool ok() const { return errors.empty(); }
  std::vector<std::string> messages() const;
};

/// Checks every call against the registry signatures and that every feature
/// is Scalar. Collects all mismatches rather than stopping at the first.
TypeCheckResult typecheck(const FeatureProgram& program, const PrimitiveRegistry& registry);

/// Throws TypeCheckFailed unless `program` typechecks.
void require_well_typed(const FeatureProgram& program, const PrimitiveRegistry& registry);

}  // namespace geoprog
