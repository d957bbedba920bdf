#include "geoprog/dsl/parser.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <unordered_set>

#include "geoprog/error.hpp"

namespace geoprog {

SyntaxError::SyntaxError(const std::string& message, std::size_t line, std::size_t column,
                         std::vector<std::string> expected)
    : DslError("SyntaxError",
               [&] {
                 std::string m = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
                 if (!expected.empty()) {
                   m += " (expected ";
                   for (std::size_t i = 0; i < expected.size(); ++i) m += (i ? ", " : "") + expected[i];
                   m += ")";
                 }
                 return m;
               }(),
               line, column),
      expected_(std::move(expected)) {}

UnknownPrimitive::UnknownPrimitive(const std::string& name, std::size_t line, std::size_t column)
    : DslError("UnknownPrimitive",
               std::to_string(line) + ":" + std::to_string(column) + ": unknown primitive '" + name + "'", line,
               column) {}

UnboundIdentifier::UnboundIdentifier(const std::string& name, std::size_t line, std::size_t column)
    : DslError("UnboundIdentifier",
               std::to_string(line) + ":" + std::to_string(column) + ": unbound identifier '" + name + "'", line,
               column) {}

DuplicateName::DuplicateName(const std::string& name, std::size_t line, std::size_t column)
    : DslError("DuplicateName",
               std::to_string(line) + ":" + std::to_string(column) + ": duplicate name '" + name + "'", line, column) {}

namespace {

enum class Tok {
  Ident, Number, String, LParen, RParen, LBracket, RBracket, Comma, Colon, Semicolon, Newline, Equals,
  Plus, Minus, Star, Slash, End
};

const char* tok_text(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Semicolon: return "';'";
    case Tok::Newline: return "newline";
    case Tok::Equals: return "'='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok type;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    int depth = 0;
    while (true) {
      skip_blanks();
      const SourcePos pos{line_, col_};
      if (i_ >= src_.size()) {
        out.push_back({Tok::End, "", 0.0, pos});
        return out;
      }
      const char c = src_[i_];
      if (c == '\n') {
        advance();
        if (depth == 0 && (out.empty() || out.back().type != Tok::Newline)) out.push_back({Tok::Newline, "\n", 0.0, pos});
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string id;
        while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) id += advance();
        out.push_back({Tok::Ident, std::move(id), 0.0, pos});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
        out.push_back(number(pos));
        continue;
      }
      if (c == '"') {
        out.push_back(string(pos));
        continue;
      }
      Tok t;
      switch (c) {
        case '(': t = Tok::LParen; ++depth; break;
        case ')': t = Tok::RParen; --depth; break;
        case '[': t = Tok::LBracket; ++depth; break;
        case ']': t = Tok::RBracket; --depth; break;
        case ',': t = Tok::Comma; break;
        case ':': t = Tok::Colon; break;
        case ';': t = Tok::Semicolon; break;
        case '=': t = Tok::Equals; break;
        case '+': t = Tok::Plus; break;
        case '-': t = Tok::Minus; break;
        case '*': t = Tok::Star; break;
        case '/': t = Tok::Slash; break;
        default:
          throw SyntaxError(std::string("unexpected character '") + c + "'", pos.line, pos.column);
      }
      if (depth < 0) depth = 0;
      out.push_back({t, std::string(1, advance()), 0.0, pos});
    }
  }

 private:
  char advance() {
    const char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_blanks() {
    while (i_ < src_.size()) {
      const char c = src_[i_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '\\' && i_ + 1 < src_.size() && src_[i_ + 1] == '\n') {
        advance();
        advance();
      } else if (c == '#') {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token number(SourcePos pos) {
    const std::size_t start = i_;
    auto digits = [&] {
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) advance();
    };
    digits();
    if (i_ < src_.size() && src_[i_] == '.') {
      advance();
      digits();
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      const std::size_t save_i = i_, save_col = col_;
      advance();
      if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-')) advance();
      if (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
        digits();
      } else {
        i_ = save_i;
        col_ = save_col;
      }
    }
    std::string text(src_.substr(start, i_ - start));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw SyntaxError("malformed number '" + text + "'", pos.line, pos.column);
    return {Tok::Number, std::move(text), v, pos};
  }

  Token string(SourcePos pos) {
    advance();  // opening quote
    std::string s;
    while (true) {
      if (i_ >= src_.size() || src_[i_] == '\n')
        throw SyntaxError("unterminated string literal", pos.line, pos.column, {"'\"'"});
      const char c = advance();
      if (c == '"') break;
      if (c == '\\') {
        if (i_ >= src_.size()) throw SyntaxError("unterminated escape", line_, col_);
        const char e = advance();
        switch (e) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case '\\': s += '\\'; break;
          case '"': s += '"'; break;
          default: throw SyntaxError(std::string("unknown escape \\") + e, line_, col_ - 1);
        }
      } else {
        s += c;
      }
    }
    return {Tok::String, std::move(s), 0.0, pos};
  }

  std::string_view src_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

bool is_keyword(std::string_view s) {
  return s == "def" || s == "return" || s == "True" || s == "False" || s == "true" || s == "false";
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const PrimitiveRegistry& registry)
      : toks_(std::move(tokens)), registry_(registry) {}

  FeatureProgram program() {
    FeatureProgram prog;
    skip_separators();
    expect_keyword("def");
    prog.name = expect(Tok::Ident).text;
    expect(Tok::LParen);
    const Token param = expect(Tok::Ident);
    if (is_keyword(param.text)) fail_at(param, "keyword used as parameter name", {"identifier"});
    prog.param = param.text;
    scope_.insert(prog.param);
    expect(Tok::RParen);
    expect(Tok::Colon);

    while (true) {
      skip_separators();
      if (peek().type == Tok::Ident && peek().text == "return") break;
      if (peek().type != Tok::Ident || is_keyword(peek().text)) fail("expected a binding or return", {"identifier", "'return'"});
      const Token name = next();
      expect(Tok::Equals);
      auto value = expr();
      if (scope_.contains(name.text)) throw DuplicateName(name.text, name.pos.line, name.pos.column);
      scope_.insert(name.text);
      prog.bindings.push_back({name.text, std::move(value), name.pos});
      if (peek().type != Tok::Newline && peek().type != Tok::Semicolon) fail("expected end of statement", {"newline", "';'"});
    }

    next();  // return
    expect(Tok::LBracket);
    std::unordered_set<std::string> feature_names;
    while (true) {
      const Token open = expect(Tok::LParen);
      const Token fname = expect(Tok::String);
      expect(Tok::Comma);
      auto value = expr();
      expect(Tok::RParen);
      if (!feature_names.insert(fname.text).second) throw DuplicateName(fname.text, fname.pos.line, fname.pos.column);
      prog.features.push_back({fname.text, std::move(value), open.pos});
      if (peek().type == Tok::Comma) {
        next();
        if (peek().type == Tok::RBracket) break;
        continue;
      }
      if (peek().type != Tok::RBracket) fail("expected ',' or ']' in feature list", {"','", "']'"});
      break;
    }
    expect(Tok::RBracket);
    skip_separators();
    expect(Tok::End);
    return prog;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  Token next() { return toks_[i_ == toks_.size() - 1 ? i_ : i_++]; }

  [[noreturn]] void fail_at(const Token& t, const std::string& message, std::vector<std::string> expected) {
    std::string found = t.type == Tok::End ? "end of input" : "'" + (t.type == Tok::Newline ? std::string("\\n") : t.text) + "'";
    throw SyntaxError(message + ", found " + found, t.pos.line, t.pos.column, std::move(expected));
  }
  [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected) {
    fail_at(peek(), message, std::move(expected));
  }

  Token expect(Tok type) {
    if (peek().type != type) fail(std::string("expected ") + tok_text(type), {tok_text(type)});
    return next();
  }

  void expect_keyword(std::string_view kw) {
    if (peek().type != Tok::Ident || peek().text != kw) fail("expected '" + std::string(kw) + "'", {"'" + std::string(kw) + "'"});
    next();
  }

  void skip_separators() {
    while (peek().type == Tok::Newline || peek().type == Tok::Semicolon) next();
  }

  ExprPtr expr() {
    auto lhs = term();
    while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
      const Token op = next();
      auto rhs = term();
      lhs = Expr::make_binary(op.text[0], std::move(lhs), std::move(rhs), op.pos);
      check_primitive(op.type == Tok::Plus ? "add" : "sub", op.pos);
    }
    return lhs;
  }

  ExprPtr term() {
    auto lhs = unary();
    while (peek().type == Tok::Star || peek().type == Tok::Slash) {
      const Token op = next();
      auto rhs = unary();
      lhs = Expr::make_binary(op.text[0], std::move(lhs), std::move(rhs), op.pos);
      check_primitive(op.type == Tok::Star ? "mul" : "div", op.pos);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (peek().type == Tok::Minus) {
      const Token minus = next();
      if (peek().type == Tok::Number) {
        const Token num = next();
        return Expr::make_number(-num.number, minus.pos);
      }
      check_primitive("negate", minus.pos);
      return Expr::make_negate(unary(), minus.pos);
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.type) {
      case Tok::Number: {
        const Token num = next();
        return Expr::make_number(num.number, num.pos);
      }
      case Tok::String: {
        const Token s = next();
        return Expr::make_string(s.text, s.pos);
      }
      case Tok::LParen: {
        next();
        auto inner = expr();
        expect(Tok::RParen);
        return inner;
      }
      case Tok::Ident: {
        const Token id = next();
        if (id.text == "True" || id.text == "true") return Expr::make_bool(true, id.pos);
        if (id.text == "False" || id.text == "false") return Expr::make_bool(false, id.pos);
        if (is_keyword(id.text)) fail_at(id, "unexpected keyword", {"expression"});
        if (peek().type == Tok::LParen) {
          next();
          std::vector<ExprPtr> args;
          if (peek().type != Tok::RParen) {
            while (true) {
              args.push_back(expr());
              if (peek().type == Tok::Comma) {
                next();
                continue;
              }
              break;
            }
          }
          expect(Tok::RParen);
          check_primitive(id.text, id.pos);
          return Expr::make_call(id.text, std::move(args), id.pos);
        }
        if (!scope_.contains(id.text)) throw UnboundIdentifier(id.text, id.pos.line, id.pos.column);
        return Expr::make_var(id.text, id.pos);
      }
      default:
        fail("expected an expression", {"number", "string", "identifier", "'('", "'-'"});
    }
  }

  void check_primitive(const std::string& name, SourcePos pos) {
    if (!registry_.contains(name)) throw UnknownPrimitive(name, pos.line, pos.column);
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const PrimitiveRegistry& registry_;
  std::set<std::string, std::less<>> scope_;
};

}  // namespace

FeatureProgram parse(std::string_view source, const PrimitiveRegistry& registry) {
  return Parser(Lexer(source).run(), registry).program();
}

}  // namespace geoprog
