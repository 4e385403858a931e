#pragma once

#include <string_view>
#include <vector>

#include "lexer.hpp"
#include "stml/ast.hpp"

namespace stml::detail {

/// Recursive-descent parser for the C subset. In template mode it also
/// accepts the rule-language extensions: `{a, b}` list literals, the
/// `if_then:` / `if_then_else:` / `gen_list:` generate constructs, and
/// arbitrary postfix bases for indexing (`cexpr(a)[i]`).
class Parser {
 public:
  Parser(std::vector<Token> tokens, bool template_mode);

  Node translation_unit();
  /// Statements up to (not including) a closing `}` or end of input.
  std::vector<Node> statement_list();
  Node statement();
  Node expression();
  /// Assignment-level expression without the comma operator.
  Node assignment();

  const Token& peek(std::size_t ahead = 0) const;
  bool at_punct(std::string_view p) const;
  bool at_end() const { return peek().kind == TokKind::End; }
  bool accept_punct(std::string_view p);
  void expect_punct(std::string_view p);
  Token take();
  [[noreturn]] void fail(const std::string& message) const;

 private:
  Node statement_inner(bool allow_pragmas);
  Node declaration(bool top_level, bool in_for_init);
  Node declarator(const std::string& type);
  Node function_definition(const std::string& type, const Token& name);
  Node generate_construct(const Token& head);
  Node binary(int min_prec);
  Node unary();
  Node postfix();
  Node primary();
  std::vector<Property> pending_pragmas(const std::vector<Token>& pragmas);

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool template_mode_;
};

bool is_type_keyword(std::string_view s);

/// Parses a pragma body (text after `#pragma`) into a fact.
Property parse_pragma(std::string_view body, int line, bool template_mode);

}  // namespace stml::detail
