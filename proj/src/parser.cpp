#include "parser.hpp"

#include <algorithm>
#include <array>

#include "stml/error.hpp"

namespace stml::detail {

namespace {

constexpr std::array<std::string_view, 5> kTypes = {"int", "long", "float", "double", "void"};
constexpr std::array<std::string_view, 14> kUnsupported = {
    "goto",   "switch", "case",   "break",    "continue", "do",     "struct",
    "union",  "enum",   "typedef", "unsigned", "char",     "signed", "sizeof"};

int binary_precedence(std::string_view op) {
  if (op == "||") return 3;
  if (op == "&&") return 4;
  if (op == "==" || op == "!=") return 8;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 9;
  if (op == "+" || op == "-") return 11;
  if (op == "*" || op == "/" || op == "%") return 12;
  return -1;
}

bool is_aug_assign(std::string_view op) {
  return op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=";
}

}  // namespace

bool is_type_keyword(std::string_view s) {
  return std::find(kTypes.begin(), kTypes.end(), s) != kTypes.end();
}

Parser::Parser(std::vector<Token> tokens, bool template_mode)
    : toks_(std::move(tokens)), template_mode_(template_mode) {}

const Token& Parser::peek(std::size_t ahead) const {
  std::size_t p = std::min(pos_ + ahead, toks_.size() - 1);
  return toks_[p];
}

bool Parser::at_punct(std::string_view p) const {
  return peek().kind == TokKind::Punct && peek().text == p;
}

bool Parser::accept_punct(std::string_view p) {
  if (!at_punct(p)) return false;
  ++pos_;
  return true;
}

void Parser::expect_punct(std::string_view p) {
  if (!accept_punct(p)) {
    const Token& t = peek();
    fail("expected '" + std::string(p) + "' but found " +
         (t.kind == TokKind::End ? std::string("end of input") : "'" + t.text + "'"));
  }
}

Token Parser::take() {
  Token t = peek();
  if (pos_ < toks_.size() - 1) ++pos_;
  return t;
}

void Parser::fail(const std::string& message) const {
  throw SyntaxError(peek().line, peek().col, message);
}

Node Parser::translation_unit() {
  Node tu = Node::make(NodeKind::TranslationUnit);
  tu.line = 1;
  tu.children = statement_list();
  if (!at_end()) fail("unexpected '" + peek().text + "'");
  return tu;
}

std::vector<Node> Parser::statement_list() {
  std::vector<Node> out;
  while (!at_end() && !at_punct("}")) out.push_back(statement());
  return out;
}

std::vector<Property> Parser::pending_pragmas(const std::vector<Token>& pragmas) {
  std::vector<Property> props;
  props.reserve(pragmas.size());
  for (const auto& p : pragmas) props.push_back(parse_pragma(p.text, p.line, template_mode_));
  return props;
}

Node Parser::statement() {
  std::vector<Token> pragmas;
  while (peek().kind == TokKind::Pragma) pragmas.push_back(take());
  if (!pragmas.empty() && (at_end() || at_punct("}"))) {
    throw PragmaError("line " + std::to_string(pragmas.back().line) +
                      ": pragma is not followed by a statement");
  }
  auto props = pending_pragmas(pragmas);
  Node s = statement_inner(true);
  s.props.insert(s.props.begin(), props.begin(), props.end());
  return s;
}

Node Parser::statement_inner(bool) {
  const Token& t = peek();
  int line = t.line;
  if (t.kind == TokKind::Punct && t.text == "{") {
    take();
    Node b = Node::make(NodeKind::Block);
    b.line = line;
    b.children = statement_list();
    expect_punct("}");
    return b;
  }
  if (t.kind == TokKind::Punct && t.text == ";") fail("empty statements are not supported");
  if (t.kind == TokKind::Ident) {
    if (std::find(kUnsupported.begin(), kUnsupported.end(), t.text) != kUnsupported.end())
      throw UnsupportedFeature("line " + std::to_string(line) + ": '" + t.text + "' is outside the supported subset");
    if (template_mode_ && (t.text == "if_then" || t.text == "if_then_else" || t.text == "gen_list") &&
        peek(1).kind == TokKind::Punct && peek(1).text == ":") {
      Token head = take();
      take();
      return generate_construct(head);
    }
    if (t.text == "for") {
      take();
      expect_punct("(");
      Node f = Node::make(NodeKind::For);
      f.line = line;
      if (at_punct(";")) throw UnsupportedFeature("line " + std::to_string(line) + ": for loops need an init clause");
      if (peek().kind == TokKind::Ident && is_type_keyword(peek().text)) {
        f.children.push_back(declaration(false, true));
      } else {
        f.children.push_back(expression());
      }
      expect_punct(";");
      if (at_punct(";")) throw UnsupportedFeature("line " + std::to_string(line) + ": for loops need a condition");
      f.children.push_back(expression());
      expect_punct(";");
      if (at_punct(")")) throw UnsupportedFeature("line " + std::to_string(line) + ": for loops need a step");
      f.children.push_back(expression());
      expect_punct(")");
      f.children.push_back(statement());
      return f;
    }
    if (t.text == "while") {
      take();
      expect_punct("(");
      Node w = Node::make(NodeKind::While);
      w.line = line;
      w.children.push_back(expression());
      expect_punct(")");
      w.children.push_back(statement());
      return w;
    }
    if (t.text == "if") {
      take();
      expect_punct("(");
      Node n = Node::make(NodeKind::If);
      n.line = line;
      n.children.push_back(expression());
      expect_punct(")");
      n.children.push_back(statement());
      if (peek().kind == TokKind::Ident && peek().text == "else") {
        take();
        n.children.push_back(statement());
      }
      return n;
    }
    if (t.text == "return") {
      take();
      Node r = Node::make(NodeKind::Return);
      r.line = line;
      r.children.push_back(expression());
      expect_punct(";");
      return r;
    }
    if (t.text == "const") throw UnsupportedFeature("line " + std::to_string(line) + ": qualifiers are not supported");
    if (is_type_keyword(t.text)) {
      Node d = declaration(true, false);
      if (d.kind == NodeKind::Decl) expect_punct(";");
      return d;
    }
  }
  Node e = expression();
  expect_punct(";");
  Node s = Node::make(NodeKind::ExprStmt, {}, {std::move(e)});
  s.line = line;
  return s;
}

Node Parser::declaration(bool top_level, bool) {
  Token type = take();
  if (peek().kind == TokKind::Punct && peek().text == "*")
    throw UnsupportedFeature("line " + std::to_string(type.line) + ": pointers are not supported");
  if (top_level && peek().kind == TokKind::Ident && peek(1).kind == TokKind::Punct && peek(1).text == "(") {
    Token name = take();
    return function_definition(type.text, name);
  }
  if (type.text == "void") fail("void variables are not allowed");
  Node d = Node::make(NodeKind::Decl, type.text);
  d.line = type.line;
  do {
    d.children.push_back(declarator(type.text));
  } while (accept_punct(","));
  return d;
}

Node Parser::declarator(const std::string& type) {
  if (at_punct("*")) throw UnsupportedFeature("line " + std::to_string(peek().line) + ": pointers are not supported");
  if (peek().kind != TokKind::Ident) fail("expected a declarator name");
  Token name = take();
  Node d = Node::make(NodeKind::Declarator, name.text);
  d.type = type;
  d.line = name.line;
  while (accept_punct("[")) {
    if (at_punct("]")) fail("array dimensions must be given");
    d.children.push_back(expression());
    expect_punct("]");
    ++d.dims;
  }
  if (d.dims > 2) throw UnsupportedFeature("line " + std::to_string(name.line) + ": arrays of rank > 2 are not supported");
  if (accept_punct("=")) {
    if (d.dims > 0) throw UnsupportedFeature("line " + std::to_string(name.line) + ": array initializers are not supported");
    d.children.push_back(assignment());
  }
  return d;
}

Node Parser::function_definition(const std::string& type, const Token& name) {
  Node f = Node::make(NodeKind::FuncDef, name.text);
  f.type = type;
  f.line = name.line;
  expect_punct("(");
  if (!at_punct(")")) {
    if (peek().kind == TokKind::Ident && peek().text == "void" && peek(1).kind == TokKind::Punct && peek(1).text == ")") {
      take();
    } else {
      do {
        if (peek().kind != TokKind::Ident || !is_type_keyword(peek().text) || peek().text == "void")
          fail("expected a parameter type");
        Token ptype = take();
        Node p = declarator(ptype.text);
        if (p.dims > 0 || p.has_init())
          throw UnsupportedFeature("line " + std::to_string(p.line) + ": only scalar parameters are supported");
        f.children.push_back(std::move(p));
      } while (accept_punct(","));
    }
  }
  expect_punct(")");
  if (!at_punct("{")) fail("expected a function body");
  f.children.push_back(statement_inner(false));
  return f;
}

Node Parser::generate_construct(const Token& head) {
  expect_punct("{");
  Node n;
  if (head.text == "gen_list") {
    n = Node::make(NodeKind::GenList);
    while (!at_punct("}")) n.children.push_back(statement());
    if (n.children.empty()) fail("gen_list needs at least one alternative");
  } else {
    n = Node::make(head.text == "if_then" ? NodeKind::IfThen : NodeKind::IfThenElse);
    n.children.push_back(expression());
    expect_punct(";");
    if (head.text == "if_then") {
      Node then = Node::make(NodeKind::Block);
      then.children = statement_list();
      n.children.push_back(std::move(then));
    } else {
      n.children.push_back(statement());
      n.children.push_back(statement());
    }
  }
  n.line = head.line;
  expect_punct("}");
  return n;
}

Node Parser::expression() {
  Node e = assignment();
  if (at_punct(",")) throw UnsupportedFeature("line " + std::to_string(peek().line) + ": the comma operator is not supported");
  return e;
}

Node Parser::assignment() {
  Node lhs = binary(0);
  if (at_punct("?")) throw UnsupportedFeature("line " + std::to_string(peek().line) + ": the conditional operator is not supported");
  if (peek().kind == TokKind::Punct && (peek().text == "=" || is_aug_assign(peek().text))) {
    Token op = take();
    Node rhs = assignment();
    if (op.text == "=") return Node::make(NodeKind::Assign, {}, {std::move(lhs), std::move(rhs)});
    return Node::make(NodeKind::AugAssign, op.text, {std::move(lhs), std::move(rhs)});
  }
  return lhs;
}

Node Parser::binary(int min_prec) {
  Node lhs = unary();
  for (;;) {
    const Token& t = peek();
    if (t.kind != TokKind::Punct) break;
    if (t.text == "&" || t.text == "|" || t.text == "^" || t.text == "<<" || t.text == ">>")
      throw UnsupportedFeature("line " + std::to_string(t.line) + ": bitwise operators are not supported");
    int prec = binary_precedence(t.text);
    if (prec < 0 || prec < min_prec) break;
    std::string op = take().text;
    Node rhs = binary(prec + 1);
    lhs = Node::make(NodeKind::BinOp, op, {std::move(lhs), std::move(rhs)});
  }
  return lhs;
}

Node Parser::unary() {
  const Token& t = peek();
  if (t.kind == TokKind::Punct) {
    if (t.text == "-" || t.text == "!" || t.text == "+" || t.text == "++" || t.text == "--") {
      std::string op = take().text;
      Node operand = unary();
      if (op == "+") return operand;
      return Node::make(NodeKind::UnaryOp, op, {std::move(operand)});
    }
    if (t.text == "*" || t.text == "&")
      throw UnsupportedFeature("line " + std::to_string(t.line) + ": pointers are not supported");
    if (t.text == "~") throw UnsupportedFeature("line " + std::to_string(t.line) + ": bitwise operators are not supported");
  }
  return postfix();
}

Node Parser::postfix() {
  Node e = primary();
  for (;;) {
    if (at_punct("[")) {
      if (!template_mode_ && e.kind != NodeKind::Var && e.kind != NodeKind::Index)
        fail("only named arrays can be indexed");
      take();
      Node idx = expression();
      expect_punct("]");
      if (e.kind == NodeKind::Index) {
        e.children.push_back(std::move(idx));
        if (e.children.size() > 3)
          throw UnsupportedFeature("line " + std::to_string(peek().line) + ": arrays of rank > 2 are not supported");
      } else {
        e = Node::make(NodeKind::Index, {}, {std::move(e), std::move(idx)});
      }
    } else if (at_punct("++") || at_punct("--")) {
      std::string op = take().text;
      Node u = Node::make(NodeKind::UnaryOp, op, {std::move(e)});
      u.postfix = true;
      e = std::move(u);
    } else if (at_punct(".") || at_punct("->")) {
      throw UnsupportedFeature("line " + std::to_string(peek().line) + ": member access is not supported");
    } else {
      break;
    }
  }
  return e;
}

Node Parser::primary() {
  Token t = peek();
  switch (t.kind) {
    case TokKind::Int:
      take();
      return Node::make(NodeKind::IntLit, t.text);
    case TokKind::Float:
      take();
      return Node::make(NodeKind::FloatLit, t.text);
    case TokKind::Ident: {
      if (is_type_keyword(t.text) || t.text == "for" || t.text == "while" || t.text == "if" ||
          t.text == "else" || t.text == "return")
        fail("unexpected keyword '" + t.text + "'");
      take();
      if (accept_punct("(")) {
        Node call = Node::make(NodeKind::Call, t.text);
        if (!at_punct(")")) {
          do {
            call.children.push_back(assignment());
          } while (accept_punct(","));
        }
        expect_punct(")");
        return call;
      }
      return Node::var(t.text);
    }
    case TokKind::Punct:
      if (t.text == "(") {
        take();
        if (peek().kind == TokKind::Ident && is_type_keyword(peek().text))
          throw UnsupportedFeature("line " + std::to_string(t.line) + ": casts are not supported");
        Node e = expression();
        expect_punct(")");
        return e;
      }
      if (t.text == "{" && template_mode_) {
        take();
        Node list = Node::make(NodeKind::List);
        if (!at_punct("}")) {
          do {
            list.children.push_back(assignment());
          } while (accept_punct(","));
        }
        expect_punct("}");
        return list;
      }
      fail("unexpected '" + t.text + "'");
    case TokKind::Pragma:
      fail("unexpected pragma inside an expression");
    case TokKind::End:
      fail("unexpected end of input");
  }
  fail("unexpected token");
}

}  // namespace stml::detail
