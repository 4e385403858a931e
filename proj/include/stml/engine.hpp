#pragma once

#include <string>
#include <vector>

#include "stml/ast.hpp"
#include "stml/rules.hpp"
#include "stml/semantics.hpp"

namespace stml {

enum class Certainty { Proven, Unknown };

std::string_view certainty_name(Certainty c);

struct Match {
  std::string rule;
  NodeId pos = 0;
  Binding binding;
  Certainty certainty = Certainty::Proven;
  std::size_t variant = 0;
  std::string digest;  // of the AST the match was computed on
};

struct StepRecord {
  std::size_t index = 0;
  Match match;
  std::string before_hash;
  std::string after_hash;
  std::string diff;
  std::string old_code;  // replaced subtree
  std::string new_code;  // generated fragment
  bool overridden = false;
  std::string next_rule;  // filled in by the derivation driver
  std::vector<Warning> warnings;
};

/// Every applicable match, ordered by (preorder position, rule order,
/// binding order). Matches with a False condition are omitted.
std::vector<Match> app_rules(const AnnotatedAst& ast, const RuleSet& rules);
std::vector<Match> app_rules(const AnnotatedAst& ast, const RuleSet& rules, const PropertyStore& store);

struct TransResult {
  AnnotatedAst ast;
  StepRecord record;
};

/// Applies `match`. Throws StaleMatch when `ast` is not the AST the match was
/// computed on, UnsafeApplication for an Unknown match without `override_unknown`.
TransResult trans(const AnnotatedAst& ast, const Match& match, const RuleSet& rules, bool override_unknown = false);

/// Linear history with undo.
class History {
 public:
  explicit History(AnnotatedAst initial) : initial_(std::move(initial)) {}

  const AnnotatedAst& current() const { return states_.empty() ? initial_ : states_.back(); }
  const AnnotatedAst& initial() const { return initial_; }
  const std::vector<StepRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

  const StepRecord& push(TransResult r);
  /// Drops the last step; throws EmptyHistory when there is none.
  const AnnotatedAst& undo();

 private:
  AnnotatedAst initial_;
  std::vector<AnnotatedAst> states_;
  std::vector<StepRecord> records_;
};

}  // namespace stml
