#pragma once

#include <string>
#include <string_view>

#include "geoprog/dsl/ast.hpp"
#include "geoprog/primitives/registry.hpp"

namespace geoprog {

/// Parses feature-program source text.
///
/// Grammar (EBNF, see docs/dsl.md):
///
///     program  = sep* "def" IDENT "(" IDENT ")" ":" { sep* binding sep } sep* return sep* EOF
///     binding  = IDENT "=" expr
///     return   = "return" "[" feature { "," feature } [ "," ] "]"
///     feature  = "(" STRING "," expr ")"
///     expr     = term { ("+" | "-") term }
///     term     = unary { ("*" | "/") unary }
///     unary    = "-" unary | primary
///     primary  = NUMBER | STRING | "True" | "False" | "true" | "false"
///              | IDENT "(" [ expr { "," expr } ] ")" | IDENT | "(" expr ")"
///     sep      = NEWLINE | ";"
///
/// Newlines inside brackets are ignored and `#` starts a comment. A `-`
/// immediately followed by a numeric literal folds into a negative literal.
///
/// Throws SyntaxError, UnknownPrimitive (call names checked against
/// `registry`), UnboundIdentifier, or DuplicateName.
FeatureProgram parse(std::string_view source, const PrimitiveRegistry& registry);

}  // namespace geoprog
