#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stml/ast.hpp"
#include "stml/semantics.hpp"

namespace stml {

enum class MetaKind { Expr, Stmt, Stmts };

std::string_view meta_kind_name(MetaKind k);

/// What a metavariable is bound to. Expr and Stmt hold one node.
struct Fragment {
  MetaKind kind = MetaKind::Expr;
  std::vector<Node> nodes;
};

using Binding = std::map<std::string, Fragment>;

/// Where a pattern is tried: at expression nodes, at statement nodes, or
/// against the whole child list of a block / translation unit.
enum class PatternShape { Expression, Statement, Sequence };

struct Rule {
  std::string name;
  std::vector<Node> pattern;     // template statements
  PatternShape shape = PatternShape::Statement;
  std::vector<Node> conditions;  // predicate applications, evaluated left to right
  std::vector<Node> generate;    // template statements
  std::vector<Property> asserts;
  std::map<std::string, MetaKind> metavars;
  int line = 0;

  /// The expression template of an Expression-shaped pattern.
  const Node& pattern_expr() const { return pattern.front().children.front(); }
};

class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  const std::vector<Rule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  const Rule* find(std::string_view name) const;
  std::vector<std::string> names() const;
  /// Appends `other`; a rule with an existing name replaces the earlier one.
  void append(const RuleSet& other);

 private:
  std::vector<Rule> rules_;
};

/// Parses rule definitions:
///   Name { pattern: {..} condition: {..} generate: {..} assert: {..} }
RuleSet parse_rules(std::string_view source);
RuleSet load_rules(const std::string& path);

/// Every binding under which `rule`'s pattern equals the code at `at`, in
/// deterministic order (leftmost statement-sequence split shortest first).
std::vector<Binding> match_pattern(const Rule& rule, const AnnotatedAst& ast, NodeId at);
/// Matches a pattern list against a statement sequence.
std::vector<Binding> match_sequence(const std::vector<Node>& pattern, const std::vector<Node>& subject);
/// Matches one template node against one code node.
std::vector<Binding> match_node(const Node& pattern, const Node& subject);

/// One way the condition section can hold: the binding extended by binder
/// predicates (`fresh_var`, `occurs_in` on an unbound metavariable) and the
/// conjunction of every predicate outcome. Outcomes that are False are omitted.
struct ConditionResult {
  Binding binding;
  Tri certainty = Tri::True;
};

std::vector<ConditionResult> check_conditions(const Rule& rule, const Binding& binding, const PropertyStore& store,
                                              NodeId pos);

struct Instance {
  std::vector<Node> statements;  // Statement / Sequence rules
  std::optional<Node> expression;  // Expression rules
  std::vector<Property> asserts;
};

/// Number of alternatives produced by `gen_list:` constructs (1 if none).
std::size_t variant_count(const Rule& rule);

Instance instantiate(const Rule& rule, const Binding& binding, const PropertyStore& store, NodeId pos = 0,
                     std::size_t variant = 0);

/// Replaces every structural occurrence of `from` in `target` by `to`.
Node subs(const Node& target, const Node& from, const Node& to);
std::vector<Node> subs(const std::vector<Node>& target, const Node& from, const Node& to);

/// Canonical text of a binding (for tests and JSON).
std::string binding_text(const Binding& b);

}  // namespace stml
