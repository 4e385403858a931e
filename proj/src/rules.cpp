#include <fstream>
#include <functional>
#include <sstream>

#include "parser.hpp"
#include "stml/error.hpp"
#include "stml/frontend.hpp"
#include "stml/rules.hpp"

namespace stml {

std::string_view meta_kind_name(MetaKind k) {
  switch (k) {
    case MetaKind::Expr: return "cexpr";
    case MetaKind::Stmt: return "cstmt";
    case MetaKind::Stmts: return "cstmts";
  }
  return "?";
}

const Rule* RuleSet::find(std::string_view name) const {
  for (const auto& r : rules_)
    if (r.name == name) return &r;
  return nullptr;
}

std::vector<std::string> RuleSet::names() const {
  std::vector<std::string> out;
  for (const auto& r : rules_) out.push_back(r.name);
  return out;
}

void RuleSet::append(const RuleSet& other) {
  for (const auto& r : other.rules_) {
    auto it = std::find_if(rules_.begin(), rules_.end(), [&](const Rule& x) { return x.name == r.name; });
    if (it != rules_.end())
      *it = r;
    else
      rules_.push_back(r);
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

using detail::Parser;
using detail::TokKind;
using detail::Token;

std::string at_line(int line) { return "line " + std::to_string(line) + ": "; }

class TemplateBuilder {
 public:
  explicit TemplateBuilder(Rule& rule) : rule_(rule) {}

  // Rewrites cexpr/cstmt/cstmts/bin_oper calls into template nodes and
  // records metavariable kinds.
  void convert(Node& n) {
    for (auto& c : n.children) convert(c);
    for (auto& p : n.props) {
      for (auto& a : p.args) convert(a);
      for (auto& a : p.locations) convert(a);
    }
    if (n.kind == NodeKind::Call) {
      std::optional<MetaKind> mk;
      if (n.text == "cexpr") mk = MetaKind::Expr;
      if (n.text == "cstmt") mk = MetaKind::Stmt;
      if (n.text == "cstmts") mk = MetaKind::Stmts;
      if (mk) {
        if (n.children.size() != 1 || n.children[0].kind != NodeKind::Var)
          throw RuleSyntaxError(at_line(n.line) + "rule " + rule_.name + ": " + n.text + " takes one name");
        std::string name = n.children[0].text;
        note(name, *mk, n.line);
        n.kind = *mk == MetaKind::Expr ? NodeKind::MetaExpr
                 : *mk == MetaKind::Stmt ? NodeKind::MetaStmt
                                         : NodeKind::MetaStmts;
        n.text = name;
        n.children.clear();
      } else if (n.text == "bin_oper") {
        if (n.children.size() != 3)
          throw RuleSyntaxError(at_line(n.line) + "rule " + rule_.name + ": bin_oper takes three arguments");
        n.kind = NodeKind::BinOper;
        n.text.clear();
      }
    }
    if (n.kind == NodeKind::ExprStmt && n.children.size() == 1 &&
        (n.children[0].kind == NodeKind::MetaStmt || n.children[0].kind == NodeKind::MetaStmts)) {
      Node inner = std::move(n.children[0]);
      inner.props = std::move(n.props);
      n = std::move(inner);
    }
  }

  void note(const std::string& name, MetaKind k, int line) {
    auto [it, fresh] = kinds_.emplace(name, k);
    if (!fresh && it->second != k)
      throw RuleSyntaxError(at_line(line) + "rule " + rule_.name + ": metavariable '" + name + "' used as both " +
                            std::string(meta_kind_name(it->second)) + " and " + std::string(meta_kind_name(k)));
  }

 private:
  Rule& rule_;
  std::map<std::string, MetaKind> kinds_;
};

void collect_metavars(const Node& n, std::vector<std::pair<std::string, int>>& out) {
  if (n.kind == NodeKind::MetaExpr || n.kind == NodeKind::MetaStmt || n.kind == NodeKind::MetaStmts)
    out.emplace_back(n.text, n.line);
  for (const auto& c : n.children) collect_metavars(c, out);
  for (const auto& p : n.props) {
    for (const auto& a : p.args) collect_metavars(a, out);
    for (const auto& a : p.locations) collect_metavars(a, out);
  }
}

MetaKind kind_of(const Node& n) {
  return n.kind == NodeKind::MetaExpr ? MetaKind::Expr
         : n.kind == NodeKind::MetaStmt ? MetaKind::Stmt
                                        : MetaKind::Stmts;
}

void flatten_conjunction(Node e, std::vector<Node>& out) {
  if (e.kind == NodeKind::BinOp && e.text == "&&") {
    flatten_conjunction(std::move(e.children[0]), out);
    flatten_conjunction(std::move(e.children[1]), out);
    return;
  }
  out.push_back(std::move(e));
}

bool has_top_level_stmts(const std::vector<Node>& stmts) {
  for (const auto& s : stmts)
    if (s.kind == NodeKind::MetaStmts) return true;
  return false;
}

void validate(Rule& r) {
  if (r.pattern.empty()) throw RuleSyntaxError(at_line(r.line) + "rule " + r.name + " has an empty pattern");
  std::vector<std::pair<std::string, int>> seen;
  for (const auto& p : r.pattern) collect_metavars(p, seen);
  std::function<void(const Node&)> kinds = [&](const Node& n) {
    if (n.kind == NodeKind::MetaExpr || n.kind == NodeKind::MetaStmt || n.kind == NodeKind::MetaStmts)
      r.metavars.emplace(n.text, kind_of(n));
    for (const auto& c : n.children) kinds(c);
  };
  for (const auto& p : r.pattern) kinds(p);

  std::set<std::string> known;
  for (const auto& [name, line] : seen) known.insert(name);
  auto check = [&](const Node& n) {
    std::vector<std::pair<std::string, int>> used;
    collect_metavars(n, used);
    for (const auto& [name, line] : used)
      if (!known.count(name))
        throw UnboundMetavariable(at_line(line ? line : r.line) + "rule " + r.name + ": metavariable '" + name +
                                  "' is not bound by the pattern");
  };

  for (const auto& c : r.conditions) {
    if (c.kind != NodeKind::Call)
      throw RuleSyntaxError(at_line(c.line ? c.line : r.line) + "rule " + r.name +
                            ": conditions must be predicate applications");
    auto arity = predicate_arity(c.text);
    if (!arity) throw RuleSyntaxError(at_line(c.line ? c.line : r.line) + "rule " + r.name + ": unknown predicate '" + c.text + "'");
    if (*arity != c.children.size())
      throw PredicateArityError("rule " + r.name + ": " + c.text + " takes " + std::to_string(*arity) +
                                " arguments, got " + std::to_string(c.children.size()));
    bool binder = (c.text == "fresh_var" || c.text == "occurs_in") && c.children[0].kind == NodeKind::MetaExpr &&
                  !known.count(c.children[0].text);
    if (binder) {
      known.insert(c.children[0].text);
      r.metavars.emplace(c.children[0].text, MetaKind::Expr);
      for (std::size_t i = 1; i < c.children.size(); ++i) check(c.children[i]);
    } else {
      check(c);
    }
  }
  for (const auto& g : r.generate) check(g);
  for (const auto& a : r.asserts) {
    for (const auto& x : a.args) check(x);
    for (const auto& x : a.locations) check(x);
  }

  if (r.pattern.size() > 1 || has_top_level_stmts(r.pattern))
    r.shape = PatternShape::Sequence;
  else if (r.pattern[0].kind == NodeKind::ExprStmt)
    r.shape = PatternShape::Expression;
  else
    r.shape = PatternShape::Statement;
  if (r.shape == PatternShape::Expression &&
      (r.generate.size() != 1 || r.generate[0].kind != NodeKind::ExprStmt))
    throw RuleSyntaxError(at_line(r.line) + "rule " + r.name +
                          ": an expression pattern must generate exactly one expression");
}

}  // namespace

RuleSet parse_rules(std::string_view source) {
  std::vector<Token> toks;
  try {
    toks = detail::lex(source);
  } catch (const SyntaxError& e) {
    throw RuleSyntaxError(e.what());
  }
  Parser p(std::move(toks), true);
  std::vector<Rule> rules;
  try {
    while (!p.at_end()) {
      Rule r;
      const Token& first = p.peek();
      if (first.kind != TokKind::Ident) p.fail("expected a rule name");
      r.line = first.line;
      r.name = p.take().text;
      while (p.at_punct("-") && p.peek(1).kind == TokKind::Ident) {
        p.take();
        r.name += "-" + p.take().text;
      }
      for (const auto& other : rules)
        if (other.name == r.name) throw RuleSyntaxError(at_line(r.line) + "duplicate rule '" + r.name + "'");
      p.expect_punct("{");
      TemplateBuilder tb(r);
      bool seen_pattern = false, seen_generate = false;
      while (!p.at_punct("}")) {
        const Token& sec = p.peek();
        if (sec.kind != TokKind::Ident) p.fail("expected a section name");
        std::string name = p.take().text;
        p.expect_punct(":");
        p.expect_punct("{");
        if (name == "pattern") {
          r.pattern = p.statement_list();
          for (auto& s : r.pattern) tb.convert(s);
          seen_pattern = true;
        } else if (name == "condition") {
          for (auto& s : p.statement_list()) {
            if (s.kind != NodeKind::ExprStmt) throw RuleSyntaxError(at_line(s.line) + "conditions are expressions");
            Node e = std::move(s.children[0]);
            if (e.line == 0) e.line = s.line;
            tb.convert(e);
            flatten_conjunction(std::move(e), r.conditions);
          }
        } else if (name == "generate") {
          r.generate = p.statement_list();
          for (auto& s : r.generate) tb.convert(s);
          seen_generate = true;
        } else if (name == "assert") {
          while (p.peek().kind == TokKind::Pragma) {
            Token t = p.take();
            Node holder = Node::make(NodeKind::Block);
            holder.props.push_back(detail::parse_pragma(t.text, t.line, true));
            tb.convert(holder);
            holder.props[0].provenance = Provenance::RuleAssert;
            r.asserts.push_back(std::move(holder.props[0]));
          }
        } else {
          throw RuleSyntaxError(at_line(sec.line) + "unknown section '" + name + "'");
        }
        p.expect_punct("}");
      }
      p.expect_punct("}");
      if (!seen_pattern || !seen_generate)
        throw RuleSyntaxError(at_line(r.line) + "rule " + r.name + " needs pattern and generate sections");
      validate(r);
      rules.push_back(std::move(r));
    }
  } catch (const SyntaxError& e) {
    throw RuleSyntaxError(e.what());
  } catch (const PragmaError& e) {
    throw RuleSyntaxError(e.what());
  } catch (const UnsupportedFeature& e) {
    throw RuleSyntaxError(e.what());
  }
  return RuleSet(std::move(rules));
}

RuleSet load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot read rule file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

// ---------------------------------------------------------------------------
// Matching

namespace {

using Cont = std::function<void()>;

class Matcher {
 public:
  Binding b;

  void node(const Node& p, const Node& s, const Cont& k) {
    switch (p.kind) {
      case NodeKind::MetaExpr:
        if (is_expression(s.kind) || s.kind == NodeKind::Decl) bind_one(p.text, MetaKind::Expr, s, k);
        return;
      case NodeKind::MetaStmt:
        if (is_statement(s.kind)) bind_one(p.text, MetaKind::Stmt, s, k);
        return;
      case NodeKind::MetaStmts: {
        std::vector<Node> one{s};
        seq_bind(p.text, one, 0, one.size(), k);
        return;
      }
      case NodeKind::BinOper: {
        if (s.kind != NodeKind::BinOp) return;
        const Node& op = p.children[0];
        auto rest = [&] { node(p.children[1], s.children[0], [&] { node(p.children[2], s.children[1], k); }); };
        if (op.kind == NodeKind::MetaExpr) {
          bind_one(op.text, MetaKind::Expr, Node::make(NodeKind::Operator, s.text), rest);
        } else if (op.kind == NodeKind::Operator && op.text == s.text) {
          rest();
        }
        return;
      }
      case NodeKind::Block:
        if (s.kind == NodeKind::Block) {
          seq(p.children, 0, s.children, 0, k);
        } else if (is_statement(s.kind)) {
          std::vector<Node> one{s};
          seq(p.children, 0, one, 0, k);
        }
        return;
      default:
        break;
    }
    if (p.kind != s.kind || p.text != s.text || p.type != s.type || p.postfix != s.postfix || p.dims != s.dims)
      return;
    if (p.kind == NodeKind::TranslationUnit) {
      seq(p.children, 0, s.children, 0, k);
      return;
    }
    if (p.children.size() != s.children.size()) return;
    children(p, s, 0, k);
  }

  void seq(const std::vector<Node>& ps, std::size_t pi, const std::vector<Node>& ss, std::size_t si, const Cont& k) {
    if (pi == ps.size()) {
      if (si == ss.size()) k();
      return;
    }
    const Node& p = ps[pi];
    if (p.kind == NodeKind::MetaStmts) {
      auto it = b.find(p.text);
      if (it != b.end()) {
        std::size_t len = it->second.nodes.size();
        if (si + len > ss.size()) return;
        for (std::size_t j = 0; j < len; ++j)
          if (!structurally_equal(it->second.nodes[j], ss[si + j], false)) return;
        seq(ps, pi + 1, ss, si + len, k);
        return;
      }
      for (std::size_t end = si; end <= ss.size(); ++end)
        seq_bind(p.text, ss, si, end, [&] { seq(ps, pi + 1, ss, end, k); });
      return;
    }
    if (si >= ss.size()) return;
    node(p, ss[si], [&] { seq(ps, pi + 1, ss, si + 1, k); });
  }

 private:
  void children(const Node& p, const Node& s, std::size_t i, const Cont& k) {
    if (i == p.children.size()) {
      k();
      return;
    }
    node(p.children[i], s.children[i], [&] { children(p, s, i + 1, k); });
  }

  void bind_one(const std::string& name, MetaKind kind, const Node& s, const Cont& k) {
    auto it = b.find(name);
    if (it != b.end()) {
      if (it->second.nodes.size() == 1 && structurally_equal(it->second.nodes[0], s, false)) k();
      return;
    }
    b.emplace(name, Fragment{kind, {s}});
    k();
    b.erase(name);
  }

  void seq_bind(const std::string& name, const std::vector<Node>& ss, std::size_t from, std::size_t to,
                const Cont& k) {
    auto it = b.find(name);
    if (it != b.end()) {
      const auto& have = it->second.nodes;
      if (have.size() != to - from) return;
      for (std::size_t j = 0; j < have.size(); ++j)
        if (!structurally_equal(have[j], ss[from + j], false)) return;
      k();
      return;
    }
    Fragment f{MetaKind::Stmts,
               std::vector<Node>(ss.begin() + static_cast<std::ptrdiff_t>(from),
                                 ss.begin() + static_cast<std::ptrdiff_t>(to))};
    b.emplace(name, std::move(f));
    k();
    b.erase(name);
  }
};

}  // namespace

std::vector<Binding> match_sequence(const std::vector<Node>& pattern, const std::vector<Node>& subject) {
  std::vector<Binding> out;
  Matcher m;
  m.seq(pattern, 0, subject, 0, [&] { out.push_back(m.b); });
  return out;
}

std::vector<Binding> match_node(const Node& pattern, const Node& subject) {
  std::vector<Binding> out;
  Matcher m;
  m.node(pattern, subject, [&] { out.push_back(m.b); });
  return out;
}

std::vector<Binding> match_pattern(const Rule& rule, const AnnotatedAst& ast, NodeId at) {
  const Node* s = ast.find(at);
  if (!s) return {};
  switch (rule.shape) {
    case PatternShape::Expression:
      if (!is_expression(s->kind)) return {};
      return match_node(rule.pattern_expr(), *s);
    case PatternShape::Statement:
      if (!is_statement(s->kind)) return {};
      return match_node(rule.pattern[0], *s);
    case PatternShape::Sequence:
      if (s->kind != NodeKind::Block && s->kind != NodeKind::TranslationUnit) return {};
      return match_sequence(rule.pattern, s->children);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Substitution and instantiation

Node subs(const Node& target, const Node& from, const Node& to) {
  if (structurally_equal(target, from, false)) return to;
  Node out = target;
  for (auto& c : out.children) c = subs(c, from, to);
  return out;
}

std::vector<Node> subs(const std::vector<Node>& target, const Node& from, const Node& to) {
  std::vector<Node> out;
  out.reserve(target.size());
  for (const auto& t : target) out.push_back(subs(t, from, to));
  return out;
}

namespace {

class Instantiator {
 public:
  Instantiator(const Binding& b, const PropertyStore& store, NodeId pos, std::size_t variant)
      : b_(b), store_(store), pos_(pos), variant_(variant) {}

  const Fragment& bound(const Node& meta) const {
    auto it = b_.find(meta.text);
    if (it == b_.end()) throw UnboundMetavariable("metavariable '" + meta.text + "' has no binding");
    return it->second;
  }

  // A template standing for a statement list or one node.
  std::vector<Node> fragment(const Node& t) {
    if (t.kind == NodeKind::MetaStmts || t.kind == NodeKind::MetaStmt) return bound(t).nodes;
    if (t.kind == NodeKind::Call && t.text == "subs") {
      check_subs(t);
      return stml::subs(fragment(t.children[0]), expr(t.children[1]), expr(t.children[2]));
    }
    if (is_statement(t.kind)) return stmts({t});
    return {expr(t)};
  }

  Node expr(const Node& t) {
    switch (t.kind) {
      case NodeKind::MetaExpr:
      case NodeKind::MetaStmt: {
        const Fragment& f = bound(t);
        if (f.nodes.size() != 1) throw InstantiationError("metavariable '" + t.text + "' is not a single node");
        return f.nodes[0];
      }
      case NodeKind::MetaStmts:
        throw InstantiationError("cstmts(" + t.text + ") cannot stand for an expression");
      case NodeKind::BinOper: {
        Node op = expr(t.children[0]);
        if (op.kind != NodeKind::Operator)
          throw InstantiationError("bin_oper needs an operator, got '" + print_expr(op) + "'");
        Node out = Node::make(NodeKind::BinOp, op.text, {expr(t.children[1]), expr(t.children[2])});
        return out;
      }
      case NodeKind::Call:
        if (t.text == "subs") {
          auto f = fragment(t);
          if (f.size() != 1) throw InstantiationError("subs on a statement list used as an expression");
          return f[0];
        }
        break;
      default:
        break;
    }
    Node out = fresh_copy(t);
    for (const auto& c : t.children) out.children.push_back(is_statement(c.kind) ? stmt(c) : expr(c));
    return out;
  }

  std::vector<Node> stmts(const std::vector<Node>& ts) {
    std::vector<Node> out;
    for (const auto& t : ts) {
      std::size_t before = out.size();
      switch (t.kind) {
        case NodeKind::MetaStmt:
        case NodeKind::MetaStmts: {
          const auto& ns = bound(t).nodes;
          out.insert(out.end(), ns.begin(), ns.end());
          break;
        }
        case NodeKind::IfThen: {
          Tri c = condition(t.children[0]);
          if (c == Tri::Unknown) throw InstantiationError("if_then condition is undecided");
          if (c == Tri::True) {
            auto xs = stmts(t.children[1].children);
            out.insert(out.end(), xs.begin(), xs.end());
          }
          break;
        }
        case NodeKind::IfThenElse: {
          Tri c = condition(t.children[0]);
          if (c == Tri::Unknown) throw InstantiationError("if_then_else condition is undecided");
          auto xs = stmts({t.children[c == Tri::True ? 1 : 2]});
          out.insert(out.end(), xs.begin(), xs.end());
          break;
        }
        case NodeKind::GenList: {
          auto xs = stmts({t.children[variant_ % t.children.size()]});
          out.insert(out.end(), xs.begin(), xs.end());
          break;
        }
        case NodeKind::ExprStmt:
          if (t.children[0].kind == NodeKind::Call && t.children[0].text == "subs" &&
              (t.children[0].children[0].kind == NodeKind::MetaStmt ||
               t.children[0].children[0].kind == NodeKind::MetaStmts || is_statement(t.children[0].children[0].kind))) {
            auto xs = fragment(t.children[0]);
            out.insert(out.end(), xs.begin(), xs.end());
            break;
          }
          out.push_back(stmt(t));
          break;
        default:
          out.push_back(stmt(t));
          break;
      }
      if (!t.props.empty() && out.size() > before && !is_plain_statement(t)) {
        auto ps = props(t.props);
        auto& dst = out[before].props;
        dst.insert(dst.begin(), ps.begin(), ps.end());
      }
    }
    return out;
  }

  Node stmt(const Node& t) {
    switch (t.kind) {
      case NodeKind::Block: {
        Node out = fresh_copy(t);
        out.children = stmts(t.children);
        out.props = props(t.props);
        return out;
      }
      case NodeKind::MetaStmt:
      case NodeKind::MetaStmts:
      case NodeKind::IfThen:
      case NodeKind::IfThenElse:
      case NodeKind::GenList:
      case NodeKind::ExprStmt: {
        if (t.kind == NodeKind::ExprStmt && !(t.children[0].kind == NodeKind::Call && t.children[0].text == "subs")) {
          Node out = fresh_copy(t);
          out.children.push_back(expr(t.children[0]));
          out.props = props(t.props);
          return out;
        }
        auto xs = stmts({t});
        if (xs.size() == 1) return xs[0];
        Node blk = Node::make(NodeKind::Block);
        blk.children = std::move(xs);
        return blk;
      }
      default:
        break;
    }
    Node out = fresh_copy(t);
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      const Node& c = t.children[i];
      bool body = (t.kind == NodeKind::For && i == 3) || (t.kind == NodeKind::While && i == 1) ||
                  (t.kind == NodeKind::If && i >= 1);
      if (body || is_statement(c.kind))
        out.children.push_back(stmt(c));
      else
        out.children.push_back(c.kind == NodeKind::Declarator ? expr_declarator(c) : expr(c));
    }
    out.props = props(t.props);
    return out;
  }

  std::vector<Property> props(const std::vector<Property>& ps) {
    std::vector<Property> out;
    for (const auto& p : ps) {
      Property q = p;
      for (auto& a : q.args) a = expr(a);
      for (auto& a : q.locations) a = expr(a);
      q.provenance = Provenance::RuleAssert;
      q.line = 0;
      out.push_back(std::move(q));
    }
    return out;
  }

  Tri condition(const Node& c);

 private:
  static bool is_plain_statement(const Node& t) {
    // Statements built by stmt() already carry their own instantiated facts.
    return t.kind != NodeKind::MetaStmt && t.kind != NodeKind::MetaStmts && t.kind != NodeKind::IfThen &&
           t.kind != NodeKind::IfThenElse && t.kind != NodeKind::GenList &&
           !(t.kind == NodeKind::ExprStmt && t.children[0].kind == NodeKind::Call && t.children[0].text == "subs");
  }

  Node expr_declarator(const Node& d) {
    Node out = fresh_copy(d);
    for (const auto& c : d.children) out.children.push_back(expr(c));
    return out;
  }

  static Node fresh_copy(const Node& t) {
    Node out = Node::make(t.kind, t.text);
    out.type = t.type;
    out.dims = t.dims;
    out.postfix = t.postfix;
    return out;
  }

  static void check_subs(const Node& t) {
    if (t.children.size() != 3) throw InstantiationError("subs takes three arguments");
  }

  const Binding& b_;
  const PropertyStore& store_;
  NodeId pos_;
  std::size_t variant_;

  friend std::optional<PredArg> pred_arg(Instantiator&, const Node&, const PropertyStore&);
};

std::optional<PredArg> pred_arg(Instantiator& in, const Node& t, const PropertyStore& store) {
  switch (t.kind) {
    case NodeKind::List: {
      PredArg a;
      a.list = true;
      for (const auto& c : t.children) {
        if (c.kind == NodeKind::MetaStmts || c.kind == NodeKind::MetaStmt) {
          auto ns = in.bound(c).nodes;
          a.nodes.insert(a.nodes.end(), ns.begin(), ns.end());
        } else {
          a.nodes.push_back(in.expr(c));
        }
      }
      return a;
    }
    case NodeKind::MetaStmts:
    case NodeKind::MetaStmt:
      return PredArg{in.bound(t).nodes, false};
    case NodeKind::Call:
      if (t.text == "writes") {
        if (t.children.size() != 1) throw PredicateArityError("writes takes one argument");
        auto inner = pred_arg(in, t.children[0], store);
        if (!inner) return std::nullopt;
        auto w = writes_of(*inner, store);
        if (!w) return std::nullopt;
        return PredArg{*w, true};
      }
      if (t.text == "subs") return PredArg{in.fragment(t), false};
      break;
    default:
      break;
  }
  return PredArg::of(in.expr(t));
}

Tri eval_condition(Instantiator& in, const Node& c, const PropertyStore& store, NodeId pos) {
  std::vector<PredArg> args;
  for (const auto& a : c.children) {
    auto x = pred_arg(in, a, store);
    if (!x) return Tri::Unknown;
    args.push_back(std::move(*x));
  }
  return eval_predicate(c.text, args, store, pos);
}

Tri Instantiator::condition(const Node& c) {
  if (c.kind != NodeKind::Call) throw InstantiationError("conditions must be predicate applications");
  return eval_condition(*this, c, store_, pos_);
}

bool leaf(const Node& n) {
  return n.kind == NodeKind::Var || n.kind == NodeKind::IntLit || n.kind == NodeKind::FloatLit ||
         n.kind == NodeKind::Operator;
}

// Distinct non-trivial subexpressions of `nodes`, in preorder.
std::vector<Node> subexpressions(const std::vector<Node>& nodes) {
  std::vector<Node> out;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    bool candidate = is_expression(n.kind) && !leaf(n) && n.kind != NodeKind::Assign &&
                     n.kind != NodeKind::AugAssign && n.kind != NodeKind::MetaExpr &&
                     !(n.kind == NodeKind::UnaryOp && (n.text == "++" || n.text == "--"));
    if (candidate) {
      bool dup = false;
      for (const auto& o : out)
        if (structurally_equal(o, n, false)) dup = true;
      if (!dup) out.push_back(n);
    }
    for (const auto& c : n.children) walk(c);
  };
  for (const auto& n : nodes) walk(n);
  return out;
}

class ConditionRunner {
 public:
  ConditionRunner(const Rule& r, const PropertyStore& store, NodeId pos) : r_(r), store_(store), pos_(pos) {}

  void run(std::size_t i, Binding& b, Tri acc) {
    if (i == r_.conditions.size()) {
      out.push_back({b, acc});
      return;
    }
    const Node& c = r_.conditions[i];
    bool binder = (c.text == "fresh_var" || c.text == "occurs_in") && !c.children.empty() &&
                  c.children[0].kind == NodeKind::MetaExpr && !b.count(c.children[0].text);
    if (binder) {
      const std::string& name = c.children[0].text;
      if (c.text == "fresh_var") {
        b.emplace(name, Fragment{MetaKind::Expr, {Node::var(fresh_name(b))}});
        run(i + 1, b, acc);
        b.erase(name);
        return;
      }
      Instantiator in(b, store_, pos_, 0);
      auto where = pred_arg(in, c.children[1], store_);
      if (!where) return;
      for (const auto& e : subexpressions(where->nodes)) {
        b.emplace(name, Fragment{MetaKind::Expr, {e}});
        run(i + 1, b, acc);
        b.erase(name);
      }
      return;
    }
    Instantiator in(b, store_, pos_, 0);
    Tri t = eval_condition(in, c, store_, pos_);
    if (t == Tri::False) return;
    run(i + 1, b, tri_and(acc, t));
  }

  std::vector<ConditionResult> out;

 private:
  std::string fresh_name(const Binding& b) const {
    for (int k = 0;; ++k) {
      std::string name = "__stml_" + std::to_string(k);
      if (!store_.fresh(name)) continue;
      bool taken = false;
      for (const auto& [_, f] : b)
        for (const auto& n : f.nodes) {
          std::set<std::string> ids;
          collect_identifiers(n, ids);
          if (ids.count(name)) taken = true;
        }
      if (!taken) return name;
    }
  }

  const Rule& r_;
  const PropertyStore& store_;
  NodeId pos_;
};

std::size_t first_gen_list(const std::vector<Node>& ts) {
  for (const auto& t : ts) {
    if (t.kind == NodeKind::GenList) return t.children.size();
    if (auto n = first_gen_list(t.children)) return n;
  }
  return 0;
}

}  // namespace

std::vector<ConditionResult> check_conditions(const Rule& rule, const Binding& binding, const PropertyStore& store,
                                              NodeId pos) {
  ConditionRunner runner(rule, store, pos);
  Binding b = binding;
  runner.run(0, b, Tri::True);
  return std::move(runner.out);
}

std::size_t variant_count(const Rule& rule) {
  std::size_t n = first_gen_list(rule.generate);
  return n == 0 ? 1 : n;
}

Instance instantiate(const Rule& rule, const Binding& binding, const PropertyStore& store, NodeId pos,
                     std::size_t variant) {
  Instantiator in(binding, store, pos, variant);
  Instance out;
  if (rule.shape == PatternShape::Expression)
    out.expression = in.expr(rule.generate[0].children[0]);
  else
    out.statements = in.stmts(rule.generate);
  out.asserts = in.props(rule.asserts);
  return out;
}

std::string binding_text(const Binding& b) {
  auto flat = [](std::string s) {
    std::string out;
    bool space = false;
    for (char ch : s) {
      if (ch == '\n' || ch == ' ' || ch == '\t') {
        space = true;
        continue;
      }
      if (space && !out.empty()) out += ' ';
      space = false;
      out += ch;
    }
    return out;
  };
  std::string out;
  for (const auto& [name, f] : b) {
    if (!out.empty()) out += "; ";
    out += name + "=";
    if (f.kind == MetaKind::Stmts) out += "[";
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      if (i) out += " ";
      const Node& n = f.nodes[i];
      out += flat(is_expression(n.kind) ? print_expr(n) : print_node(n));
    }
    if (f.kind == MetaKind::Stmts) out += "]";
  }
  return out;
}

}  // namespace stml
