#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "stml/error.hpp"
#include "stml/oracles.hpp"

namespace stml {

namespace {

double metric_of(const Node& n) {
  double score = 0;
  switch (n.kind) {
    case NodeKind::For:
    case NodeKind::While:
      score += 11;
      break;
    case NodeKind::Block:
      break;
    case NodeKind::BinOp:
      if (n.text == "+" || n.text == "-" || n.text == "*" || n.text == "/" || n.text == "%") score += 1;
      break;
    case NodeKind::AugAssign:
      score += 1;
      break;
    case NodeKind::UnaryOp:
      if (n.text == "-") score += 1;
      break;
    default:
      if (is_statement(n.kind)) score += 1;
      break;
  }
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const Node& c = n.children[i];
    // The declaration in a for header is part of the loop statement.
    if (n.kind == NodeKind::For && i == 0 && c.kind == NodeKind::Decl) {
      for (const auto& d : c.children) score += metric_of(d);
      continue;
    }
    score += metric_of(c);
  }
  return score;
}

}  // namespace

Metric default_metric() {
  return {"loops10+statements+arith", [](const AnnotatedAst& ast) { return metric_of(ast.root()); }};
}

// ---------------------------------------------------------------------------

const std::vector<Successor>& Explorer::successors(const AnnotatedAst& ast) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = succ_.find(ast.digest());
    if (it != succ_.end()) return it->second;
  }
  std::vector<Successor> out;
  std::map<std::string, std::size_t> per_rule;
  for (auto& m : app_rules(ast, rules_)) {
    if (m.certainty != Certainty::Proven) continue;
    std::size_t ordinal = per_rule[m.rule]++;
    TransResult r = trans(ast, m, rules_);
    out.push_back({std::move(m), ordinal, std::move(r.ast), std::move(r.record)});
  }
  std::lock_guard<std::mutex> lock(mu_);
  return succ_.emplace(ast.digest(), std::move(out)).first->second;
}

const std::vector<std::string>& Explorer::applicable(const AnnotatedAst& ast) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = applicable_.find(ast.digest());
    if (it != applicable_.end()) return it->second;
  }
  std::set<std::string> seen;
  for (const auto& m : app_rules(ast, rules_))
    if (m.certainty == Certainty::Proven) seen.insert(m.rule);
  std::vector<std::string> out;
  for (const auto& r : rules_.rules())
    if (seen.count(r.name)) out.push_back(r.name);
  std::lock_guard<std::mutex> lock(mu_);
  return applicable_.emplace(ast.digest(), std::move(out)).first->second;
}

// ---------------------------------------------------------------------------

std::vector<ScriptEntry> parse_script(std::string_view text) {
  std::vector<ScriptEntry> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    ScriptEntry s;
    auto at = line.find('@');
    s.rule = line.substr(0, at);
    if (at != std::string::npos) {
      try {
        std::size_t used = 0;
        s.ordinal = std::stoul(line.substr(at + 1), &used);
        if (used != line.size() - at - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw OracleError("script line " + std::to_string(lineno) + ": bad ordinal in '" + line + "'");
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

OracleDecision ScriptedOracle::select_rule(const std::vector<Candidate>& candidates) {
  if (next_ >= script_.size()) throw OracleError("script exhausted");
  const ScriptEntry& want = script_[next_];
  std::size_t ordinal = want.ordinal.value_or(0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].rule != want.rule || candidates[i].ordinal != ordinal) continue;
    ++next_;
    return {i, next_ < script_.size() ? script_[next_].rule : std::string{}};
  }
  throw OracleError("script step " + std::to_string(next_ + 1) + ": " + want.rule +
                    (want.ordinal ? "@" + std::to_string(*want.ordinal) : std::string{}) + " does not apply");
}

bool ScriptedOracle::is_final(const AnnotatedAst& ast) {
  return next_ >= script_.size() || explorer_.successors(ast).empty();
}

// ---------------------------------------------------------------------------

namespace {

template <class Score>
std::string best_rule(Explorer& ex, const Candidate& c, Score score) {
  std::string best;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& rule : c.rules) {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& s : ex.successors(c.code))
      if (s.match.rule == rule) v = std::min(v, score(s.code));
    if (v < best_value) {
      best_value = v;
      best = rule;
    }
  }
  return best;
}

}  // namespace

OracleDecision GreedyOracle::select_rule(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw NoViableCandidate("no candidates");
  std::size_t best = 0;
  double best_value = metric_.score(candidates[0].code);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    double v = metric_.score(candidates[i].code);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return {best, best_rule(explorer_, candidates[best], metric_.score)};
}

bool GreedyOracle::is_final(const AnnotatedAst& ast) {
  double here = metric_.score(ast);
  for (const auto& s : explorer_.successors(ast))
    if (metric_.score(s.code) < here) return false;
  return true;
}

LookaheadOracle::LookaheadOracle(Explorer& explorer, int depth, Metric metric)
    : explorer_(explorer), depth_(depth), metric_(std::move(metric)) {
  if (depth < 1) throw OracleError("lookahead depth must be at least 1");
}

double LookaheadOracle::score(const AnnotatedAst& ast, int depth) {
  auto key = std::make_pair(ast.digest(), depth);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  double v = metric_.score(ast);
  if (depth > 0)
    for (const auto& s : explorer_.successors(ast)) v = std::min(v, score(s.code, depth - 1));
  memo_[key] = v;
  return v;
}

OracleDecision LookaheadOracle::select_rule(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw NoViableCandidate("no candidates");
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double v = score(candidates[i].code, depth_ - 1);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return {best, best_rule(explorer_, candidates[best], [&](const AnnotatedAst& a) { return score(a, depth_ - 1); })};
}

bool LookaheadOracle::is_final(const AnnotatedAst& ast) {
  const auto& succ = explorer_.successors(ast);
  if (succ.empty()) return true;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : succ) best = std::min(best, score(s.code, depth_ - 1));
  return best >= metric_.score(ast);
}

// ---------------------------------------------------------------------------

OracleDecision InteractiveOracle::select_rule(const std::vector<Candidate>& candidates) {
  std::unique_lock<std::mutex> lock(mu_);
  pending_ = candidates;
  decision_.reset();
  cv_.notify_all();
  cv_.wait(lock, [&] { return decision_.has_value() || finished_; });
  pending_.reset();
  if (!decision_) throw NoViableCandidate("interactive derivation finished");
  OracleDecision d = *decision_;
  decision_.reset();
  if (d.choice >= candidates.size()) throw OracleError("choice out of range");
  return d;
}

bool InteractiveOracle::is_final(const AnnotatedAst& ast) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (finished_) return true;
  }
  return explorer_.successors(ast).empty();
}

std::optional<std::vector<Candidate>> InteractiveOracle::pending() {
  std::lock_guard<std::mutex> lock(mu_);
  return pending_;
}

void InteractiveOracle::decide(OracleDecision d) {
  std::lock_guard<std::mutex> lock(mu_);
  if (!pending_) throw OracleError("no decision is pending");
  pending_.reset();
  decision_ = std::move(d);
  cv_.notify_all();
}

void InteractiveOracle::finish() {
  std::lock_guard<std::mutex> lock(mu_);
  finished_ = true;
  cv_.notify_all();
}

// ---------------------------------------------------------------------------

std::unique_ptr<Oracle> make_oracle(const std::string& spec, Explorer& explorer) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? std::string{} : spec.substr(colon + 1);
  if (kind == "scripted") {
    if (arg.empty()) throw OracleError("scripted oracle needs a script file: scripted:<file>");
    std::ifstream in(arg);
    if (!in) throw FileError("cannot read script '" + arg + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_unique<ScriptedOracle>(parse_script(ss.str()), explorer);
  }
  if (kind == "greedy" && arg.empty()) return std::make_unique<GreedyOracle>(explorer);
  if (kind == "lookahead") {
    int depth = 2;
    if (!arg.empty()) {
      try {
        std::size_t used = 0;
        depth = std::stoi(arg, &used);
        if (used != arg.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw OracleError("bad lookahead depth '" + arg + "'");
      }
    }
    return std::make_unique<LookaheadOracle>(explorer, depth);
  }
  if (kind == "http" && !arg.empty()) return std::make_unique<HttpOracle>(arg);
  throw OracleError("unknown oracle '" + spec + "' (expected scripted:<file>, greedy, lookahead:<d> or http:<url>)");
}

// ---------------------------------------------------------------------------

std::vector<Candidate> candidates_for(const AnnotatedAst& ast, const std::set<std::string>& rules,
                                      Explorer& explorer) {
  std::vector<Candidate> out;
  for (const auto& s : explorer.successors(ast)) {
    if (!rules.count(s.match.rule)) continue;
    out.push_back({s.code, explorer.applicable(s.code), s.match.rule, s.ordinal});
  }
  return out;
}

NewCodeResult new_code(const AnnotatedAst& ast, const std::set<std::string>& rules, Oracle& oracle,
                       Explorer& explorer) {
  std::vector<Candidate> cands = candidates_for(ast, rules, explorer);
  if (cands.empty()) throw NoViableCandidate("no proven application of the requested rules");
  OracleDecision d = oracle.select_rule(cands);
  if (d.choice >= cands.size()) throw OracleError("oracle chose candidate " + std::to_string(d.choice) + " of " +
                                                  std::to_string(cands.size()));
  // Locate the successor record behind the chosen candidate.
  const Candidate& c = cands[d.choice];
  for (const auto& s : explorer.successors(ast)) {
    if (s.match.rule == c.rule && s.ordinal == c.ordinal) {
      NewCodeResult r{s.code, d.next_rule, s.record, cands.size()};
      r.record.next_rule = d.next_rule;
      return r;
    }
  }
  throw OracleError("chosen candidate vanished");
}

Derivation run_derivation(const AnnotatedAst& ast, Oracle& oracle, Explorer& explorer, std::size_t budget) {
  if (budget == 0) throw OracleError("budget must be at least 1");
  Derivation d{ast, {}, DerivationStatus::Final, {}};
  std::set<std::string> rules;
  for (const auto& r : explorer.rules().rules()) rules.insert(r.name);
  while (!oracle.is_final(d.result)) {
    if (d.steps.size() >= budget) {
      d.status = DerivationStatus::BudgetExceeded;
      break;
    }
    NewCodeResult nc;
    try {
      nc = new_code(d.result, rules, oracle, explorer);
    } catch (const NoViableCandidate& e) {
      Warning w;
      w.kind = "no-viable-candidate";
      w.message = e.what();
      d.warnings.push_back(std::move(w));
      break;
    }
    nc.record.index = d.steps.size();
    for (const auto& w : nc.record.warnings) d.warnings.push_back(w);
    d.steps.push_back(nc.record);
    d.result = nc.code;
    if (nc.next_rule.empty()) break;
    rules = {nc.next_rule};
  }
  return d;
}

}  // namespace stml
