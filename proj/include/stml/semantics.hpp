#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stml/ast.hpp"

namespace stml {

enum class Tri { False, True, Unknown };

std::string_view tri_name(Tri t);
Tri tri_and(Tri a, Tri b);
Tri tri_not(Tri t);

/// A machine-readable diagnostic. `json()` is one JSON object per warning.
struct Warning {
  std::string kind;     // "conflict", "dropped-fact", ...
  std::string message;
  NodeId node = 0;
  int line = 0;
  std::string kept;     // pragma line that survived, if any
  std::string rejected; // pragma line that was discarded, if any

  std::string json() const;
};

/// Read-only index over the facts attached to an AST.
class PropertyStore {
 public:
  PropertyStore() = default;
  explicit PropertyStore(const AnnotatedAst& ast);

  const std::vector<Property>& at(NodeId id) const;
  /// Every fact with the id of the node carrying it, in preorder.
  const std::vector<std::pair<NodeId, Property>>& all() const { return all_; }

  /// `pure F` stated anywhere, or F is a side-effect-free math builtin.
  bool pure_function(const std::string& name) const;
  /// `g distributes_over f` stated anywhere.
  bool distributes_fact(const std::string& g, const std::string& f) const;
  /// `is_identity E` attached to a node preceding `pos` in source order.
  bool identity_fact_before(const Node& e, NodeId pos) const;
  /// True when `name` does not occur anywhere in the program.
  bool fresh(const std::string& name) const { return identifiers_.count(name) == 0; }
  const std::set<std::string>& identifiers() const { return identifiers_; }

 private:
  std::set<std::string> identifiers_;
  std::vector<std::pair<NodeId, Property>> all_;
  std::map<NodeId, std::vector<Property>> by_node_;
};

bool is_builtin_function(const std::string& name);

/// A memory location `base` or `base[i]..`; indices are normalized
/// (`c[i++]` is the location `c[i]`).
struct Location {
  std::string base;
  std::vector<Node> indices;

  Node expr() const;
  std::string str() const;
  friend bool operator<(const Location& a, const Location& b) { return a.str() < b.str(); }
  friend bool operator==(const Location& a, const Location& b) { return a.str() == b.str(); }
};

enum class AccessMode { Read, Write };

struct AccessSet {
  std::set<Location> reads;
  std::set<Location> writes;
  /// Offsets relative to the loop variable, per (array, mode).
  std::map<std::pair<std::string, AccessMode>, std::set<std::int64_t>> offsets;
  /// Arrays with at least one access not of the form `loop_var + k`.
  std::set<std::string> unknown_offsets;
  /// Set when some access could not be classified (e.g. a call to a
  /// function with no `pure` fact).
  bool unknown = false;
  /// Functions called without a `pure` fact.
  std::set<std::string> impure_calls;

  std::set<std::string> written_bases() const;
};

/// Syntactic read/write sets of the subtree at `at`.
AccessSet access_set(const AnnotatedAst& ast, NodeId at, const std::optional<std::string>& loop_var = {});
/// Same analysis over a detached fragment (statement sequence or expression).
AccessSet access_set(const std::vector<Node>& fragment, const PropertyStore& store,
                     const std::optional<std::string>& loop_var = {});

/// Attaches the STML facts implied by each skeleton annotation to every node carrying a POLCA skeleton
/// annotation. Facts contradicting existing ones are skipped with a warning.
AnnotatedAst lower_polca(const AnnotatedAst& ast, std::vector<Warning>* warnings = nullptr);

/// Merges sidecar lines `<file>:<line>: #pragma stml <prop>` into the AST,
/// anchoring each fact to the first statement starting on that line.
AnnotatedAst ingest_properties(const AnnotatedAst& ast, std::string_view sidecar,
                               std::vector<Warning>* warnings = nullptr);

/// True when the two facts on the same node cannot both hold.
bool facts_conflict(const Property& a, const Property& b);

/// One predicate argument: a statement, statement sequence or expression,
/// or a `{a, b}` list whose elements stand for the locations they mention.
struct PredArg {
  std::vector<Node> nodes;
  bool list = false;

  static PredArg of(Node n) { return {{std::move(n)}, false}; }
};

/// Arity of a condition predicate, or nullopt for unknown names.
std::optional<std::size_t> predicate_arity(const std::string& name);

/// Evaluates a condition predicate with all arguments bound. `pos` is the
/// match position, used by order-sensitive facts (`is_identity`).
Tri eval_predicate(const std::string& name, const std::vector<PredArg>& args, const PropertyStore& store,
                   NodeId pos = 0);

/// Locations written by an argument, or nullopt when not decidable.
std::optional<std::vector<Node>> writes_of(const PredArg& arg, const PropertyStore& store);

}  // namespace stml
