#include "geoprog/dsl/printer.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace geoprog {

std::string format_number(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite literal cannot be printed");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, ptr);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string quote_string(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

namespace {

int precedence(const Expr& e) {
  if (e.type != Expr::Type::Binary) return 3;
  return (e.op == '+' || e.op == '-') ? 1 : 2;
}

void emit(const Expr& e, std::string& out);

void emit_operand(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  emit(e, out);
  if (parens) out += ')';
}

void emit(const Expr& e, std::string& out) {
  switch (e.type) {
    case Expr::Type::Number: out += format_number(e.number); break;
    case Expr::Type::String: out += quote_string(e.name); break;
    case Expr::Type::Bool: out += e.flag ? "True" : "False"; break;
    case Expr::Type::Var: out += e.name; break;
    case Expr::Type::Call:
      out += e.name;
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        emit(*e.args[i], out);
      }
      out += ')';
      break;
    case Expr::Type::Binary: {
      const int p = precedence(e);
      emit_operand(*e.args[0], precedence(*e.args[0]) < p, out);
      out += ' ';
      out += e.op;
      out += ' ';
      emit_operand(*e.args[1], precedence(*e.args[1]) <= p, out);
      break;
    }
    case Expr::Type::Negate: {
      // A bare number after '-' would fold into a negative literal.
      const Expr& operand = *e.args[0];
      const bool parens = operand.type == Expr::Type::Binary || operand.type == Expr::Type::Number;
      out += '-';
      emit_operand(operand, parens, out);
      break;
    }
  }
}

}  // namespace

std::string to_source(const Expr& expr) {
  std::string out;
  emit(expr, out);
  return out;
}

std::string pretty_print(const FeatureProgram& program) {
  std::string out = "def " + program.name + "(" + program.param + "):\n";
  for (const auto& b : program.bindings) out += "    " + b.name + " = " + to_source(*b.value) + "\n";
  out += "    return [\n";
  for (const auto& f : program.features) out += "        (" + quote_string(f.name) + ", " + to_source(*f.value) + "),\n";
  out += "    ]\n";
  return out;
}

}  // namespace geoprog
