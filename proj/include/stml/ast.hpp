#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace stml {

using NodeId = std::uint32_t;

enum class NodeKind {
  TranslationUnit,
  FuncDef,     // text = name, type = return type; children = params (Declarator)..., body (Block)
  Decl,        // text = type; children = Declarator...
  Declarator,  // text = name, type = declared type; children = dims..., [init]
  For,         // init, cond, step, body
  While,       // cond, body
  If,          // cond, then, [else]
  Block,
  ExprStmt,
  Return,
  Assign,      // lhs, rhs
  AugAssign,   // text = operator ("+=", ...); lhs, rhs
  BinOp,       // text = operator
  UnaryOp,     // text = operator; postfix flag for ++/--
  Call,        // text = callee; children = args
  Index,       // children = base (Var), index...
  Var,
  IntLit,
  FloatLit,
  // Only produced by rule templates and metavariable bindings.
  Operator,    // a bare operator symbol bound by bin_oper
  MetaExpr,    // cexpr(name)
  MetaStmt,    // cstmt(name)
  MetaStmts,   // cstmts(name)
  BinOper,     // bin_oper(op, lhs, rhs)
  List,        // { a, b, ... } in conditions
  IfThen,      // if_then: { cond; stmts... }
  IfThenElse,  // if_then_else: { cond; then; else; }
  GenList,     // gen_list: { alt... }
};

std::string_view kind_name(NodeKind kind);
bool is_expression(NodeKind kind);
bool is_statement(NodeKind kind);

enum class Dialect { Polca, Stml };
enum class Provenance { User, Lowered, ExternalTool, RuleAssert };

std::string_view provenance_name(Provenance p);

struct Node;

/// One pragma fact. Expression arguments are parsed C expressions;
/// `offsets` holds an `in {..}` list, `locations` a `write(E) = {..}` list.
struct Property {
  Dialect dialect = Dialect::Stml;
  std::string keyword;
  std::vector<Node> args;
  std::vector<std::int64_t> offsets;
  bool has_offsets = false;
  std::vector<Node> locations;
  Provenance provenance = Provenance::User;
  int line = 0;

  /// Pragma body without the `#pragma <dialect>` prefix, in canonical spacing.
  std::string body() const;
  /// Full `#pragma stml ...` / `#pragma polca ...` line.
  std::string pragma_line() const;
};

/// Facts compare by their canonical text; provenance and line are metadata.
bool same_fact(const Property& a, const Property& b);

struct Node {
  NodeKind kind = NodeKind::TranslationUnit;
  std::string text;
  std::string type;
  std::vector<Node> children;
  std::vector<Property> props;
  NodeId id = 0;
  int line = 0;
  int dims = 0;          // Declarator: leading dimension children
  bool postfix = false;  // UnaryOp ++/--

  static Node make(NodeKind kind, std::string text = {}, std::vector<Node> children = {});
  static Node var(std::string name) { return make(NodeKind::Var, std::move(name)); }
  static Node integer(std::int64_t v) { return make(NodeKind::IntLit, std::to_string(v)); }

  bool has_init() const {
    return kind == NodeKind::Declarator && static_cast<int>(children.size()) > dims;
  }
};

/// Structural equality: kind, text, type, flags, children and attached facts.
/// Ids, source lines and provenance are ignored.
bool structurally_equal(const Node& a, const Node& b, bool compare_props = true);
bool structurally_equal(const std::vector<Node>& a, const std::vector<Node>& b,
                        bool compare_props = true);

/// Every identifier (variables, callees, declared names) occurring under `n`.
void collect_identifiers(const Node& n, std::set<std::string>& out);

/// Finds the node carrying `id` under `root` (ids of a detached copy).
Node* find_node(Node& root, NodeId id);

/// Calls `f` on every node in preorder.
template <class F>
void for_each_node(const Node& n, F&& f) {
  f(n);
  for (const auto& c : n.children) for_each_node(c, f);
}

/// An immutable, shareable program tree. Node ids are dense preorder
/// ordinals assigned at construction.
class AnnotatedAst {
 public:
  AnnotatedAst();
  explicit AnnotatedAst(Node root);

  const Node& root() const { return *root_; }
  const Node* find(NodeId id) const;
  /// Parent of `id`, or nullopt for the root.
  std::optional<NodeId> parent(NodeId id) const;
  std::size_t size() const { return index_->nodes.size(); }

  /// node id -> attached facts, in attachment order.
  std::map<NodeId, std::vector<Property>> properties() const;
  std::set<std::string> identifiers() const;

  /// Content digest (FNV-1a over the printed program), hex encoded.
  const std::string& digest() const { return index_->digest; }

 private:
  struct Index {
    std::vector<const Node*> nodes;
    std::vector<NodeId> parents;
    std::string digest;
  };
  std::shared_ptr<const Node> root_;
  std::shared_ptr<const Index> index_;
};

bool operator==(const AnnotatedAst& a, const AnnotatedAst& b);

}  // namespace stml
