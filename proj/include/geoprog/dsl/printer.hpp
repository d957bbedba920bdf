#pragma once

#include <string>

#include "geoprog/dsl/ast.hpp"

namespace geoprog {

/// Canonical program text; `parse(pretty_print(p))` is structurally equal to `p`.
std::string pretty_print(const FeatureProgram& program);

std::string to_source(const Expr& expr);

/// Shortest decimal text that reads back to exactly `value`, always with a
/// decimal point or exponent.
std::string format_number(double value);

std::string quote_string(const std::string& text);

}  // namespace geoprog
