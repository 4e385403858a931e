#include "stml/ast.hpp"

#include <cstdio>

#include "stml/frontend.hpp"

namespace stml {

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::TranslationUnit: return "TranslationUnit";
    case NodeKind::FuncDef: return "FuncDef";
    case NodeKind::Decl: return "Decl";
    case NodeKind::Declarator: return "Declarator";
    case NodeKind::For: return "For";
    case NodeKind::While: return "While";
    case NodeKind::If: return "If";
    case NodeKind::Block: return "Block";
    case NodeKind::ExprStmt: return "ExprStmt";
    case NodeKind::Return: return "Return";
    case NodeKind::Assign: return "Assign";
    case NodeKind::AugAssign: return "AugAssign";
    case NodeKind::BinOp: return "BinOp";
    case NodeKind::UnaryOp: return "UnaryOp";
    case NodeKind::Call: return "Call";
    case NodeKind::Index: return "Index";
    case NodeKind::Var: return "Var";
    case NodeKind::IntLit: return "IntLit";
    case NodeKind::FloatLit: return "FloatLit";
    case NodeKind::Operator: return "Operator";
    case NodeKind::MetaExpr: return "MetaExpr";
    case NodeKind::MetaStmt: return "MetaStmt";
    case NodeKind::MetaStmts: return "MetaStmts";
    case NodeKind::BinOper: return "BinOper";
    case NodeKind::List: return "List";
    case NodeKind::IfThen: return "IfThen";
    case NodeKind::IfThenElse: return "IfThenElse";
    case NodeKind::GenList: return "GenList";
  }
  return "?";
}

bool is_expression(NodeKind kind) {
  switch (kind) {
    case NodeKind::Assign:
    case NodeKind::AugAssign:
    case NodeKind::BinOp:
    case NodeKind::UnaryOp:
    case NodeKind::Call:
    case NodeKind::Index:
    case NodeKind::Var:
    case NodeKind::IntLit:
    case NodeKind::FloatLit:
    case NodeKind::Operator:
    case NodeKind::MetaExpr:
    case NodeKind::BinOper:
      return true;
    default:
      return false;
  }
}

bool is_statement(NodeKind kind) {
  switch (kind) {
    case NodeKind::FuncDef:
    case NodeKind::Decl:
    case NodeKind::For:
    case NodeKind::While:
    case NodeKind::If:
    case NodeKind::Block:
    case NodeKind::ExprStmt:
    case NodeKind::Return:
    case NodeKind::MetaStmt:
      return true;
    default:
      return false;
  }
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::User: return "user";
    case Provenance::Lowered: return "lowered";
    case Provenance::ExternalTool: return "external-tool";
    case Provenance::RuleAssert: return "rule-assert";
  }
  return "?";
}

std::string Property::body() const {
  std::string out;
  auto join_args = [&](std::size_t from) {
    for (std::size_t i = from; i < args.size(); ++i) {
      out += ' ';
      out += print_expr(args[i]);
    }
  };
  if (dialect == Dialect::Stml && keyword == "write") {
    out = "write(" + (args.empty() ? std::string{} : print_expr(args[0])) + ") = {";
    for (std::size_t i = 0; i < locations.size(); ++i) {
      if (i) out += ", ";
      out += print_expr(locations[i]);
    }
    out += "}";
    return out;
  }
  if (dialect == Dialect::Stml && keyword == "output") {
    return "output(" + (args.empty() ? std::string{} : print_expr(args[0])) + ")";
  }
  if (dialect == Dialect::Stml && keyword == "distributes_over" && args.size() == 2) {
    return print_expr(args[0]) + " distributes_over " + print_expr(args[1]);
  }
  out = keyword;
  join_args(0);
  if (has_offsets) {
    out += " in {";
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(offsets[i]);
    }
    out += "}";
  }
  return out;
}

std::string Property::pragma_line() const {
  return std::string("#pragma ") + (dialect == Dialect::Polca ? "polca " : "stml ") + body();
}

bool same_fact(const Property& a, const Property& b) {
  return a.dialect == b.dialect && a.body() == b.body();
}

Node Node::make(NodeKind kind, std::string text, std::vector<Node> children) {
  Node n;
  n.kind = kind;
  n.text = std::move(text);
  n.children = std::move(children);
  return n;
}

bool structurally_equal(const Node& a, const Node& b, bool compare_props) {
  if (a.kind != b.kind || a.text != b.text || a.type != b.type || a.dims != b.dims ||
      a.postfix != b.postfix || a.children.size() != b.children.size())
    return false;
  if (compare_props) {
    if (a.props.size() != b.props.size()) return false;
    for (std::size_t i = 0; i < a.props.size(); ++i)
      if (!same_fact(a.props[i], b.props[i])) return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i], compare_props)) return false;
  return true;
}

bool structurally_equal(const std::vector<Node>& a, const std::vector<Node>& b, bool compare_props) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!structurally_equal(a[i], b[i], compare_props)) return false;
  return true;
}

void collect_identifiers(const Node& n, std::set<std::string>& out) {
  for_each_node(n, [&](const Node& x) {
    switch (x.kind) {
      case NodeKind::Var:
      case NodeKind::Call:
      case NodeKind::Declarator:
      case NodeKind::FuncDef:
        out.insert(x.text);
        break;
      default:
        break;
    }
    for (const auto& p : x.props) {
      for (const auto& a : p.args) collect_identifiers(a, out);
      for (const auto& l : p.locations) collect_identifiers(l, out);
    }
  });
}

Node* find_node(Node& root, NodeId id) {
  if (root.id == id) return &root;
  // Children are in preorder, so the subtree holding `id` is the last
  // child whose id does not exceed it.
  Node* next = nullptr;
  for (auto& c : root.children) {
    if (c.id > id) break;
    next = &c;
  }
  return next ? find_node(*next, id) : nullptr;
}

namespace {

void number(Node& n, NodeId& next) {
  n.id = next++;
  for (auto& c : n.children) number(c, next);
}

void index_nodes(const Node& n, NodeId parent, std::vector<const Node*>& nodes,
                 std::vector<NodeId>& parents) {
  nodes.push_back(&n);
  parents.push_back(parent);
  for (const auto& c : n.children) index_nodes(c, n.id, nodes, parents);
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

AnnotatedAst::AnnotatedAst() : AnnotatedAst(Node::make(NodeKind::TranslationUnit)) {}

AnnotatedAst::AnnotatedAst(Node root) {
  NodeId next = 0;
  number(root, next);
  auto owned = std::make_shared<const Node>(std::move(root));
  auto index = std::make_shared<Index>();
  index->nodes.reserve(next);
  index->parents.reserve(next);
  index_nodes(*owned, 0, index->nodes, index->parents);
  root_ = std::move(owned);
  index_ = index;
  index->digest = fnv1a_hex(print_c(*this));
}

const Node* AnnotatedAst::find(NodeId id) const {
  if (id >= index_->nodes.size()) return nullptr;
  return index_->nodes[id];
}

std::optional<NodeId> AnnotatedAst::parent(NodeId id) const {
  if (id == 0 || id >= index_->parents.size()) return std::nullopt;
  return index_->parents[id];
}

std::map<NodeId, std::vector<Property>> AnnotatedAst::properties() const {
  std::map<NodeId, std::vector<Property>> out;
  for (const Node* n : index_->nodes)
    if (!n->props.empty()) out[n->id] = n->props;
  return out;
}

std::set<std::string> AnnotatedAst::identifiers() const {
  std::set<std::string> out;
  collect_identifiers(*root_, out);
  return out;
}

bool operator==(const AnnotatedAst& a, const AnnotatedAst& b) {
  return structurally_equal(a.root(), b.root());
}

}  // namespace stml
