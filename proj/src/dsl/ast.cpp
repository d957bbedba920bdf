#include "geoprog/dsl/ast.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

namespace geoprog {

namespace {
ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
}  // namespace

ExprPtr Expr::make_number(double v, SourcePos pos) {
  Expr e;
  e.type = Type::Number;
  e.number = v;
  e.pos = pos;
  return make(std::move(e));
}

ExprPtr Expr::make_string(std::string s, SourcePos pos) {
  Expr e;
  e.type = Type::String;
  e.name = std::move(s);
  e.pos = pos;
  return make(std::move(e));
}

ExprPtr Expr::make_bool(bool b, SourcePos pos) {
  Expr e;
  e.type = Type::Bool;
  e.flag = b;
  e.pos = pos;
  return make(std::move(e));
}

ExprPtr Expr::make_var(std::string name, SourcePos pos) {
  Expr e;
  e.type = Type::Var;
  e.name = std::move(name);
  e.pos = pos;
  return make(std::move(e));
}

ExprPtr Expr::make_call(std::string name, std::vector<ExprPtr> args, SourcePos pos) {
  Expr e;
  e.type = Type::Call;
  e.name = std::move(name);
  e.args = std::move(args);
  e.pos = pos;
  return make(std::move(e));
}

ExprPtr Expr::make_binary(char op, ExprPtr lhs, ExprPtr rhs, SourcePos pos) {
  Expr e;
  e.type = Type::Binary;
  e.op = op;
  e.args = {std::move(lhs), std::move(rhs)};
  e.pos = pos;
  return make(std::move(e));
}

ExprPtr Expr::make_negate(ExprPtr operand, SourcePos pos) {
  Expr e;
  e.type = Type::Negate;
  e.args = {std::move(operand)};
  e.pos = pos;
  return make(std::move(e));
}

std::string_view Expr::primitive() const {
  switch (type) {
    case Type::Call: return name;
    case Type::Negate: return "negate";
    case Type::Binary:
      switch (op) {
        case '+': return "add";
        case '-': return "sub";
        case '*': return "mul";
        case '/': return "div";
        default: return {};
      }
    default: return {};
  }
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.type != b.type || a.args.size() != b.args.size()) return false;
  switch (a.type) {
    // Bitwise comparison keeps -0.0 distinct from 0.0 and NaN equal to itself.
    case Expr::Type::Number:
      if (std::bit_cast<std::uint64_t>(a.number) != std::bit_cast<std::uint64_t>(b.number)) return false;
      break;
    case Expr::Type::Bool:
      if (a.flag != b.flag) return false;
      break;
    case Expr::Type::Binary:
      if (a.op != b.op) return false;
      break;
    case Expr::Type::String:
    case Expr::Type::Var:
    case Expr::Type::Call:
      if (a.name != b.name) return false;
      break;
    case Expr::Type::Negate: break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

const Binding* FeatureProgram::find_binding(std::string_view binding_name) const {
  for (const auto& b : bindings)
    if (b.name == binding_name) return &b;
  return nullptr;
}

bool structurally_equal(const FeatureProgram& a, const FeatureProgram& b) {
  if (a.name != b.name || a.param != b.param) return false;
  if (a.bindings.size() != b.bindings.size() || a.features.size() != b.features.size()) return false;
  for (std::size_t i = 0; i < a.bindings.size(); ++i)
    if (a.bindings[i].name != b.bindings[i].name || !structurally_equal(*a.bindings[i].value, *b.bindings[i].value))
      return false;
  for (std::size_t i = 0; i < a.features.size(); ++i)
    if (a.features[i].name != b.features[i].name || !structurally_equal(*a.features[i].value, *b.features[i].value))
      return false;
  return true;
}

std::vector<std::string> referenced_names(const Expr& expr) {
  std::vector<std::string> out;
  walk(expr, [&](const Expr& e) {
    if (e.type == Expr::Type::Var && std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
  });
  return out;
}

}  // namespace geoprog
