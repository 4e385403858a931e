#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stml/engine.hpp"

namespace stml {

/// Lower is better.
struct Metric {
  std::string name;
  std::function<double(const AnnotatedAst&)> score;
};

/// 10 per loop + 1 per statement (blocks excluded) + 1 per arithmetic operator.
Metric default_metric();

/// One successor of a program: a Proven match and the code it produces.
struct Successor {
  Match match;
  std::size_t ordinal = 0;  // index among the Proven matches of the same rule
  AnnotatedAst code;
  StepRecord record;
};

/// Memoized successor and applicable-rule computation shared by the oracles
/// and the driver.
class Explorer {
 public:
  explicit Explorer(const RuleSet& rules) : rules_(rules) {}

  const RuleSet& rules() const { return rules_; }
  const std::vector<Successor>& successors(const AnnotatedAst& ast);
  /// Rule names with at least one Proven match, in rule order.
  const std::vector<std::string>& applicable(const AnnotatedAst& ast);

 private:
  const RuleSet& rules_;
  std::mutex mu_;
  std::map<std::string, std::vector<Successor>> succ_;
  std::map<std::string, std::vector<std::string>> applicable_;
};

struct Candidate {
  AnnotatedAst code;
  std::vector<std::string> rules;  // applicable to `code`
  std::string rule;                // rule that produced `code`
  std::size_t ordinal = 0;
};

struct OracleDecision {
  std::size_t choice = 0;
  std::string next_rule;  // empty: nothing further to apply
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::string name() const = 0;
  virtual OracleDecision select_rule(const std::vector<Candidate>& candidates) = 0;
  virtual bool is_final(const AnnotatedAst& ast) = 0;
};

struct ScriptEntry {
  std::string rule;
  std::optional<std::size_t> ordinal;
};

/// Parses newline-separated `Rule` or `Rule@<ordinal>` lines; `#` starts a comment.
std::vector<ScriptEntry> parse_script(std::string_view text);

/// Replays a fixed rule sequence.
class ScriptedOracle : public Oracle {
 public:
  ScriptedOracle(std::vector<ScriptEntry> script, Explorer& explorer)
      : script_(std::move(script)), explorer_(explorer) {}
  std::string name() const override { return "scripted"; }
  OracleDecision select_rule(const std::vector<Candidate>& candidates) override;
  bool is_final(const AnnotatedAst& ast) override;
  std::size_t position() const { return next_; }

 private:
  std::vector<ScriptEntry> script_;
  Explorer& explorer_;
  std::size_t next_ = 0;
};

/// Picks the candidate with the lowest metric; final when no successor improves it.
class GreedyOracle : public Oracle {
 public:
  GreedyOracle(Explorer& explorer, Metric metric = default_metric())
      : explorer_(explorer), metric_(std::move(metric)) {}
  std::string name() const override { return "greedy"; }
  OracleDecision select_rule(const std::vector<Candidate>& candidates) override;
  bool is_final(const AnnotatedAst& ast) override;

 private:
  Explorer& explorer_;
  Metric metric_;
};

/// Scores a program by the best metric reachable within `depth` steps.
class LookaheadOracle : public Oracle {
 public:
  LookaheadOracle(Explorer& explorer, int depth = 2, Metric metric = default_metric());
  std::string name() const override { return "lookahead:" + std::to_string(depth_); }
  OracleDecision select_rule(const std::vector<Candidate>& candidates) override;
  bool is_final(const AnnotatedAst& ast) override;
  double score(const AnnotatedAst& ast, int depth);

 private:
  Explorer& explorer_;
  int depth_;
  Metric metric_;
  std::map<std::pair<std::string, int>, double> memo_;
};

/// Blocks in select_rule until a decision arrives through `decide`.
class InteractiveOracle : public Oracle {
 public:
  explicit InteractiveOracle(Explorer& explorer) : explorer_(explorer) {}
  std::string name() const override { return "interactive"; }
  OracleDecision select_rule(const std::vector<Candidate>& candidates) override;
  bool is_final(const AnnotatedAst& ast) override;

  /// Candidates awaiting a decision, if any.
  std::optional<std::vector<Candidate>> pending();
  void decide(OracleDecision d);
  /// Ends the derivation: is_final becomes true and a blocked select_rule returns.
  void finish();

 private:
  Explorer& explorer_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::optional<std::vector<Candidate>> pending_;
  std::optional<OracleDecision> decision_;
  bool finished_ = false;
};

/// Delegates to an external process over HTTP (POST <base>/oracle/select and
/// <base>/oracle/is_final).
class HttpOracle : public Oracle {
 public:
  explicit HttpOracle(std::string base_url);
  std::string name() const override { return "http"; }
  OracleDecision select_rule(const std::vector<Candidate>& candidates) override;
  bool is_final(const AnnotatedAst& ast) override;

 private:
  std::string base_;
};

/// scripted:<file> | greedy | lookahead[:<d>] | http:<url>
std::unique_ptr<Oracle> make_oracle(const std::string& spec, Explorer& explorer);

struct NewCodeResult {
  AnnotatedAst code;
  std::string next_rule;
  StepRecord record;
  std::size_t candidates = 0;
};

/// One protocol round: every Proven successor produced by a rule in `rules`
/// is offered to the oracle. Throws NoViableCandidate when there is none.
NewCodeResult new_code(const AnnotatedAst& ast, const std::set<std::string>& rules, Oracle& oracle,
                       Explorer& explorer);

/// Candidates as new_code would offer them.
std::vector<Candidate> candidates_for(const AnnotatedAst& ast, const std::set<std::string>& rules,
                                      Explorer& explorer);

enum class DerivationStatus { Final, BudgetExceeded };

struct Derivation {
  AnnotatedAst result;
  std::vector<StepRecord> steps;
  DerivationStatus status = DerivationStatus::Final;
  std::vector<Warning> warnings;
};

constexpr std::size_t kDefaultBudget = 1000;

/// Calls new_code until the oracle reports a final program: the first round
/// with every rule, later rounds with the rule returned by the previous one.
Derivation run_derivation(const AnnotatedAst& ast, Oracle& oracle, Explorer& explorer,
                          std::size_t budget = kDefaultBudget);

}  // namespace stml
