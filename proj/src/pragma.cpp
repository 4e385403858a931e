#include <array>
#include <algorithm>

#include "parser.hpp"
#include "stml/error.hpp"
#include "stml/frontend.hpp"

namespace stml::detail {

namespace {

constexpr std::array<std::string_view, 7> kPolcaKeywords = {"map",  "zipWith", "fold",  "scanl",
                                                             "def",  "input",   "output"};

[[noreturn]] void pragma_fail(int line, const std::string& msg) {
  throw PragmaError("line " + std::to_string(line) + ": " + msg);
}

bool is_operator_token(const Token& t) {
  if (t.kind != TokKind::Punct) return false;
  static constexpr std::array<std::string_view, 13> ops = {"+",  "-",  "*",  "/",  "%",  "<",  ">",
                                                          "<=", ">=", "==", "!=", "&&", "||"};
  return std::find(ops.begin(), ops.end(), t.text) != ops.end();
}

Node parse_operator(Parser& p, int line) {
  const Token& t = p.peek();
  if (is_operator_token(t)) return Node::make(NodeKind::Operator, p.take().text);
  if (t.kind == TokKind::Ident) {
    // `cexpr(op)` in rule templates names a bound operator.
    if (p.peek(1).kind == TokKind::Punct && p.peek(1).text == "(") return p.assignment();
    return Node::var(p.take().text);
  }
  pragma_fail(line, "expected an operator");
}

std::vector<std::int64_t> parse_int_list(Parser& p, int line) {
  std::vector<std::int64_t> out;
  p.expect_punct("{");
  do {
    bool neg = false;
    if (p.accept_punct("-")) neg = true;
    else p.accept_punct("+");
    const Token& t = p.peek();
    if (t.kind != TokKind::Int) pragma_fail(line, "offset lists hold integers");
    std::int64_t v = std::stoll(p.take().text);
    out.push_back(neg ? -v : v);
  } while (p.accept_punct(","));
  p.expect_punct("}");
  return out;
}

void expect_done(Parser& p, int line) {
  if (!p.at_end()) pragma_fail(line, "unexpected '" + p.peek().text + "' in pragma");
}

}  // namespace

Property parse_pragma(std::string_view body, int line, bool template_mode) {
  std::size_t sp = body.find_first_of(" \t");
  std::string_view dialect = body.substr(0, sp);
  std::string_view rest = sp == std::string_view::npos ? std::string_view{} : body.substr(sp + 1);
  Property prop;
  prop.line = line;
  if (dialect == "polca") {
    prop.dialect = Dialect::Polca;
  } else if (dialect == "stml") {
    prop.dialect = Dialect::Stml;
  } else {
    pragma_fail(line, "unsupported pragma '" + std::string(dialect) + "'");
  }

  std::vector<Token> toks;
  try {
    toks = lex(rest, line);
  } catch (const Error& e) {
    pragma_fail(line, e.what());
  }
  Parser p(std::move(toks), template_mode);
  if (p.at_end()) pragma_fail(line, "empty pragma");

  try {
    if (prop.dialect == Dialect::Polca) {
      const Token& head = p.peek();
      if (head.kind != TokKind::Ident ||
          std::find(kPolcaKeywords.begin(), kPolcaKeywords.end(), head.text) == kPolcaKeywords.end())
        pragma_fail(line, "unknown polca annotation '" + head.text + "'");
      prop.keyword = p.take().text;
      while (!p.at_end()) prop.args.push_back(p.assignment());
      return prop;
    }

    // `<op> distributes_over <op>`
    if (p.peek(1).kind == TokKind::Ident && p.peek(1).text == "distributes_over") {
      prop.keyword = "distributes_over";
      prop.args.push_back(parse_operator(p, line));
      p.take();
      prop.args.push_back(parse_operator(p, line));
      expect_done(p, line);
      return prop;
    }
    if (p.peek(0).kind == TokKind::Ident && p.peek(0).text == "cexpr" &&
        !(p.peek(1).kind == TokKind::Punct && p.peek(1).text == "(")) {
      pragma_fail(line, "malformed metavariable");
    }
    const Token head = p.peek();
    if (head.kind != TokKind::Ident) pragma_fail(line, "expected an STML property keyword");
    const std::string& kw = head.text;
    if (kw == "write" && p.peek(1).text == "(") {
      p.take();
      p.expect_punct("(");
      prop.keyword = "write";
      prop.args.push_back(p.expression());
      p.expect_punct(")");
      p.expect_punct("=");
      p.expect_punct("{");
      if (!p.at_punct("}")) {
        do {
          prop.locations.push_back(p.assignment());
        } while (p.accept_punct(","));
      }
      p.expect_punct("}");
      expect_done(p, line);
      return prop;
    }
    if (kw == "output" && p.peek(1).text == "(") {
      p.take();
      p.expect_punct("(");
      prop.keyword = "output";
      prop.args.push_back(p.expression());
      p.expect_punct(")");
      expect_done(p, line);
      return prop;
    }
    p.take();
    prop.keyword = kw;
    if (kw == "reads" || kw == "writes" || kw == "rw") {
      prop.args.push_back(p.assignment());
      if (p.peek().kind == TokKind::Ident && p.peek().text == "in") {
        p.take();
        prop.offsets = parse_int_list(p, line);
        prop.has_offsets = true;
      }
    } else if (kw == "appears" || kw == "pure" || kw == "is_identity") {
      prop.args.push_back(p.assignment());
    } else if (kw == "commutative" || kw == "associative") {
      prop.args.push_back(parse_operator(p, line));
    } else if (kw == "same_length" || kw == "iteration_space") {
      prop.args.push_back(p.assignment());
      if (p.at_end()) pragma_fail(line, "'" + kw + "' takes two arguments");
      prop.args.push_back(p.assignment());
    } else if (kw == "iteration_independent") {
      // no arguments
    } else {
      pragma_fail(line, "unknown stml property '" + kw + "'");
    }
    expect_done(p, line);
  } catch (const SyntaxError& e) {
    pragma_fail(line, e.what());
  } catch (const UnsupportedFeature& e) {
    pragma_fail(line, e.what());
  }
  return prop;
}

}  // namespace stml::detail
