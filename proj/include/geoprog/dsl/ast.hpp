#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace geoprog {

struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Infix arithmetic and unary minus are kept as
/// their own node types for printing but map onto the add/sub/mul/div/negate
/// primitives for typing and evaluation.
struct Expr {
  enum class Type { Number, String, Bool, Var, Call, Binary, Negate };

  Type type = Type::Number;
  double number = 0.0;
  bool flag = false;
  char op = 0;               // Binary: one of + - * /
  std::string name;          // Var name, Call name, or String contents
  std::vector<ExprPtr> args;  // Call args, Binary {lhs, rhs}, Negate {operand}
  SourcePos pos;

  static ExprPtr make_number(double v, SourcePos pos = {});
  static ExprPtr make_string(std::string s, SourcePos pos = {});
  static ExprPtr make_bool(bool b, SourcePos pos = {});
  static ExprPtr make_var(std::string name, SourcePos pos = {});
  static ExprPtr make_call(std::string name, std::vector<ExprPtr> args, SourcePos pos = {});
  static ExprPtr make_binary(char op, ExprPtr lhs, ExprPtr rhs, SourcePos pos = {});
  static ExprPtr make_negate(ExprPtr operand, SourcePos pos = {});

  bool is_literal() const { return type == Type::Number || type == Type::String || type == Type::Bool; }

  /// Primitive invoked by Call/Binary/Negate nodes; empty otherwise.
  std::string_view primitive() const;
};

/// Structural equality; source positions are ignored.
bool structurally_equal(const Expr& a, const Expr& b);

struct Binding {
  std::string name;
  ExprPtr value;
  SourcePos pos;
};

struct NamedExpr {
  std::string name;
  ExprPtr value;
  SourcePos pos;
};

/// A single-parameter feature program: ordered let-bindings followed by a
/// non-empty list of named feature expressions.
struct FeatureProgram {
  std::string name = "f";
  std::string param = "loc";
  std::vector<Binding> bindings;
  std::vector<NamedExpr> features;

  const Binding* find_binding(std::string_view binding_name) const;
};

bool structurally_equal(const FeatureProgram& a, const FeatureProgram& b);

/// Calls `visit` on every node of `expr` in pre-order.
template <typename F>
void walk(const Expr& expr, F&& visit) {
  visit(expr);
  for (const auto& a : expr.args) walk(*a, visit);
}

/// Names of the variables an expression references.
std::vector<std::string> referenced_names(const Expr& expr);

}  // namespace geoprog
