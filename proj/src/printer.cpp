#include <sstream>

#include "stml/frontend.hpp"

namespace stml {

namespace {

int precedence(const Node& e) {
  switch (e.kind) {
    case NodeKind::Assign:
    case NodeKind::AugAssign:
      return 1;
    case NodeKind::BinOp:
    case NodeKind::BinOper: {
      const std::string& op = e.kind == NodeKind::BinOp ? e.text : std::string{};
      if (op == "||") return 3;
      if (op == "&&") return 4;
      if (op == "==" || op == "!=") return 8;
      if (op == "<" || op == "<=" || op == ">" || op == ">=") return 9;
      if (op == "+" || op == "-") return 11;
      if (op == "*" || op == "/" || op == "%") return 12;
      return 16;  // bin_oper(...) prints as a call
    }
    case NodeKind::UnaryOp:
      return e.postfix ? 15 : 14;
    default:
      return 16;
  }
}

void expr(std::ostream& os, const Node& e, int min_prec);

void wrap(std::ostream& os, const Node& e, int min_prec) {
  bool parens = precedence(e) < min_prec;
  if (parens) os << '(';
  expr(os, e, 0);
  if (parens) os << ')';
}

void args(std::ostream& os, const std::vector<Node>& xs, std::size_t from = 0) {
  for (std::size_t i = from; i < xs.size(); ++i) {
    if (i > from) os << ", ";
    wrap(os, xs[i], 2);
  }
}

void expr(std::ostream& os, const Node& e, int) {
  switch (e.kind) {
    case NodeKind::Var:
    case NodeKind::IntLit:
    case NodeKind::FloatLit:
    case NodeKind::Operator:
      os << e.text;
      return;
    case NodeKind::Assign:
      wrap(os, e.children[0], 2);
      os << " = ";
      wrap(os, e.children[1], 1);
      return;
    case NodeKind::AugAssign:
      wrap(os, e.children[0], 2);
      os << ' ' << e.text << ' ';
      wrap(os, e.children[1], 1);
      return;
    case NodeKind::BinOp: {
      int p = precedence(e);
      wrap(os, e.children[0], p);
      os << ' ' << e.text << ' ';
      wrap(os, e.children[1], p + 1);
      return;
    }
    case NodeKind::UnaryOp: {
      const Node& x = e.children[0];
      if (e.postfix) {
        wrap(os, x, 15);
        os << e.text;
        return;
      }
      os << e.text;
      bool clash = x.kind == NodeKind::UnaryOp && !x.postfix &&
                   (x.text[0] == e.text[0] && (e.text == "-" || e.text == "+" || e.text.size() == 2));
      if (clash) {
        os << '(';
        expr(os, x, 0);
        os << ')';
      } else {
        wrap(os, x, 14);
      }
      return;
    }
    case NodeKind::Call:
      os << e.text << '(';
      args(os, e.children);
      os << ')';
      return;
    case NodeKind::Index:
      wrap(os, e.children[0], 15);
      for (std::size_t i = 1; i < e.children.size(); ++i) {
        os << '[';
        expr(os, e.children[i], 0);
        os << ']';
      }
      return;
    case NodeKind::MetaExpr:
      os << "cexpr(" << e.text << ')';
      return;
    case NodeKind::MetaStmt:
      os << "cstmt(" << e.text << ')';
      return;
    case NodeKind::MetaStmts:
      os << "cstmts(" << e.text << ')';
      return;
    case NodeKind::BinOper:
      os << "bin_oper(";
      args(os, e.children);
      os << ')';
      return;
    case NodeKind::List:
      os << '{';
      args(os, e.children);
      os << '}';
      return;
    default:
      os << print_node(e);
      return;
  }
}

void indent_to(std::ostream& os, int indent) {
  for (int i = 0; i < indent; ++i) os << "  ";
}

void stmt(std::ostream& os, const Node& s, int indent);

void declarators(std::ostream& os, const Node& d) {
  os << d.text << ' ';
  for (std::size_t i = 0; i < d.children.size(); ++i) {
    if (i) os << ", ";
    const Node& v = d.children[i];
    os << v.text;
    for (int k = 0; k < v.dims; ++k) {
      os << '[';
      expr(os, v.children[k], 0);
      os << ']';
    }
    if (v.has_init()) {
      os << " = ";
      wrap(os, v.children.back(), 2);
    }
  }
}

// Body of a for/while/if: braces stay on the header line for blocks without facts.
void body(std::ostream& os, const Node& b, int indent) {
  if (b.kind == NodeKind::Block && b.props.empty()) {
    os << " {\n";
    for (const auto& c : b.children) stmt(os, c, indent + 1);
    indent_to(os, indent);
    os << '}';
    return;
  }
  os << '\n';
  stmt(os, b, indent + 1);
}

void stmt(std::ostream& os, const Node& s, int indent) {
  for (const auto& p : s.props) {
    indent_to(os, indent);
    os << p.pragma_line() << '\n';
  }
  indent_to(os, indent);
  switch (s.kind) {
    case NodeKind::Decl:
      declarators(os, s);
      os << ";\n";
      return;
    case NodeKind::ExprStmt:
      expr(os, s.children[0], 0);
      os << ";\n";
      return;
    case NodeKind::Return:
      os << "return ";
      expr(os, s.children[0], 0);
      os << ";\n";
      return;
    case NodeKind::Block:
      os << "{\n";
      for (const auto& c : s.children) stmt(os, c, indent + 1);
      indent_to(os, indent);
      os << "}\n";
      return;
    case NodeKind::For: {
      os << "for (";
      const Node& init = s.children[0];
      if (init.kind == NodeKind::Decl) declarators(os, init);
      else expr(os, init, 0);
      os << "; ";
      expr(os, s.children[1], 0);
      os << "; ";
      expr(os, s.children[2], 0);
      os << ')';
      body(os, s.children[3], indent);
      if (s.children[3].kind == NodeKind::Block && s.children[3].props.empty()) os << '\n';
      return;
    }
    case NodeKind::While:
      os << "while (";
      expr(os, s.children[0], 0);
      os << ')';
      body(os, s.children[1], indent);
      if (s.children[1].kind == NodeKind::Block && s.children[1].props.empty()) os << '\n';
      return;
    case NodeKind::If: {
      os << "if (";
      expr(os, s.children[0], 0);
      os << ')';
      const Node& then = s.children[1];
      bool inline_then = then.kind == NodeKind::Block && then.props.empty();
      body(os, then, indent);
      if (s.children.size() == 3) {
        if (inline_then) {
          os << " else";
        } else {
          indent_to(os, indent);
          os << "else";
        }
        const Node& els = s.children[2];
        body(os, els, indent);
        if (els.kind == NodeKind::Block && els.props.empty()) os << '\n';
      } else if (inline_then) {
        os << '\n';
      }
      return;
    }
    case NodeKind::FuncDef: {
      os << s.type << ' ' << s.text << '(';
      for (std::size_t i = 0; i + 1 < s.children.size(); ++i) {
        if (i) os << ", ";
        os << s.children[i].type << ' ' << s.children[i].text;
      }
      os << ')';
      body(os, s.children.back(), indent);
      os << '\n';
      return;
    }
    case NodeKind::MetaStmt:
    case NodeKind::MetaStmts:
      expr(os, s, 0);
      os << ";\n";
      return;
    case NodeKind::IfThen:
    case NodeKind::IfThenElse:
    case NodeKind::GenList: {
      os << (s.kind == NodeKind::IfThen ? "if_then" : s.kind == NodeKind::IfThenElse ? "if_then_else" : "gen_list")
         << ": {\n";
      std::size_t from = 0;
      if (s.kind != NodeKind::GenList) {
        indent_to(os, indent + 1);
        expr(os, s.children[0], 0);
        os << ";\n";
        from = 1;
      }
      for (std::size_t i = from; i < s.children.size(); ++i) {
        if (s.kind == NodeKind::IfThen) {
          for (const auto& c : s.children[i].children) stmt(os, c, indent + 1);
        } else {
          stmt(os, s.children[i], indent + 1);
        }
      }
      indent_to(os, indent);
      os << "}\n";
      return;
    }
    default:
      expr(os, s, 0);
      os << '\n';
      return;
  }
}

}  // namespace

std::string print_expr(const Node& e) {
  std::ostringstream os;
  expr(os, e, 0);
  return os.str();
}

std::string print_node(const Node& n, int indent) {
  std::ostringstream os;
  if (n.kind == NodeKind::TranslationUnit) {
    for (const auto& c : n.children) stmt(os, c, indent);
  } else if (is_statement(n.kind) || n.kind == NodeKind::MetaStmts || n.kind == NodeKind::IfThen ||
             n.kind == NodeKind::IfThenElse || n.kind == NodeKind::GenList) {
    stmt(os, n, indent);
  } else if (n.kind == NodeKind::Declarator) {
    os << n.text;
  } else {
    expr(os, n, 0);
  }
  return os.str();
}

std::string print_c(const AnnotatedAst& ast) { return print_node(ast.root()); }

}  // namespace stml
