#include <doctest.h>

#include <thread>

#include "corpus.hpp"
#include "stml/error.hpp"
#include "stml/frontend.hpp"
#include "stml/oracles.hpp"

using namespace stml;
using stml::testing::corpus;

namespace {

const RuleSet& defaults() {
  static const RuleSet rules = load_rules(STML_DEFAULT_RULES);
  return rules;
}

const char* kScript =
    "For-LoopFusion\nAugAdditionAssign\nJoinAssignments\nUndoDistribute\nLoopInvCodeMotion\n";

AnnotatedAst step(int k) { return parse_c(corpus("deriv_step" + std::to_string(k) + ".c")); }

std::string renamed(const AnnotatedAst& ast) {
  std::string text = print_c(ast);
  for (std::size_t p; (p = text.find("__stml_0")) != std::string::npos;) text.replace(p, 8, "k");
  return text;
}

std::set<std::string> all_rules() {
  auto names = defaults().names();
  return {names.begin(), names.end()};
}

}  // namespace

TEST_CASE("default metric along the derivation") {
  Metric m = default_metric();
  std::vector<double> got;
  for (int k = 0; k <= 5; ++k) got.push_back(m.score(step(k)));
  CHECK(got == std::vector<double>{28, 17, 17, 16, 15, 16});
  CHECK(m.score(parse_c("")) == 0);
}

TEST_CASE("script parsing") {
  auto s = parse_script("A\n  B@2  # second match\n\n# comment\nC-D\n");
  REQUIRE(s.size() == 3);
  CHECK(s[0].rule == "A");
  CHECK(!s[0].ordinal);
  CHECK(s[1].rule == "B");
  CHECK(*s[1].ordinal == 2);
  CHECK(s[2].rule == "C-D");
  CHECK_THROWS_AS(parse_script("A@x\n"), OracleError);
}

TEST_CASE("oracle specs") {
  Explorer ex(defaults());
  CHECK(make_oracle("greedy", ex)->name() == "greedy");
  CHECK(make_oracle("lookahead", ex)->name() == "lookahead:2");
  CHECK(make_oracle("lookahead:3", ex)->name() == "lookahead:3");
  CHECK(make_oracle("http:http://127.0.0.1:1", ex)->name() == "http");
  CHECK_THROWS_AS(make_oracle("lookahead:0", ex), OracleError);
  CHECK_THROWS_AS(make_oracle("lookahead:x", ex), OracleError);
  CHECK_THROWS_AS(make_oracle("random", ex), OracleError);
  CHECK_THROWS_AS(make_oracle("scripted:/nonexistent", ex), FileError);
}

TEST_CASE("greedy picks the cheapest candidate") {
  Explorer ex(defaults());
  GreedyOracle g(ex);
  auto prog = [](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += "x = 1;\n";
    return parse_c(s);
  };
  std::vector<Candidate> cands{{prog(7), {}, "R", 0}, {prog(5), {}, "R", 1}, {prog(6), {}, "R", 2}};
  OracleDecision d = g.select_rule(cands);
  CHECK(d.choice == 1);
  CHECK(d.next_rule.empty());

  std::vector<Candidate> one{{step(1), {"AugAdditionAssign"}, "For-LoopFusion", 0}};
  d = g.select_rule(one);
  CHECK(d.choice == 0);
  CHECK(d.next_rule == "AugAdditionAssign");
}

TEST_CASE("new_code follows the protocol") {
  Explorer ex(defaults());
  ScriptedOracle o(parse_script(kScript), ex);
  NewCodeResult r = new_code(step(0), all_rules(), o, ex);
  CHECK(print_c(r.code) == print_c(step(1)));
  CHECK(r.next_rule == "AugAdditionAssign");
  CHECK(r.record.match.rule == "For-LoopFusion");

  GreedyOracle g(ex);
  CHECK_THROWS_AS(new_code(parse_c("x = 1;\n"), all_rules(), g, ex), NoViableCandidate);
}

TEST_CASE("candidate set size equals the number of proven matches") {
  Explorer ex(defaults());
  auto cands = candidates_for(step(2), all_rules(), ex);
  std::size_t proven = 0;
  for (const auto& m : app_rules(step(2), defaults()))
    if (m.certainty == Certainty::Proven) ++proven;
  CHECK(cands.size() == proven);
  CHECK(proven > 0);
  for (const auto& c : cands) CHECK(c.rules == ex.applicable(c.code));
}

TEST_CASE("scripted derivation") {
  Explorer ex(defaults());
  ScriptedOracle o(parse_script(kScript), ex);
  CHECK_FALSE(o.is_final(step(0)));
  Derivation d = run_derivation(step(0), o, ex, 10);
  CHECK(d.status == DerivationStatus::Final);
  REQUIRE(d.steps.size() == 5);
  CHECK(renamed(d.result) == print_c(step(5)));
  for (std::size_t i = 1; i < d.steps.size(); ++i) CHECK(d.steps[i].match.rule == d.steps[i - 1].next_rule);
  CHECK(d.steps.back().next_rule.empty());
  CHECK(o.is_final(d.result));

  Explorer ex2(defaults());
  ScriptedOracle o2(parse_script(kScript), ex2);
  Derivation again = run_derivation(step(0), o2, ex2, 10);
  REQUIRE(again.steps.size() == d.steps.size());
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    CHECK(again.steps[i].after_hash == d.steps[i].after_hash);
    CHECK(again.steps[i].diff == d.steps[i].diff);
  }
}

TEST_CASE("scripted oracle rejects a script that does not fit") {
  Explorer ex(defaults());
  ScriptedOracle o(parse_script("UndoDistribute\n"), ex);
  CHECK_THROWS_AS(run_derivation(step(0), o, ex, 10), OracleError);
  ScriptedOracle o2(parse_script("For-LoopFusion@1\n"), ex);
  CHECK_THROWS_AS(run_derivation(step(0), o2, ex, 10), OracleError);
}

TEST_CASE("budget exhaustion keeps the partial history") {
  Explorer ex(defaults());
  ScriptedOracle o(parse_script(kScript), ex);
  Derivation d = run_derivation(step(0), o, ex, 2);
  CHECK(d.status == DerivationStatus::BudgetExceeded);
  CHECK(d.steps.size() == 2);
  CHECK(print_c(d.result) == print_c(step(2)));
  CHECK_THROWS_AS(run_derivation(step(0), o, ex, 0), OracleError);
}

TEST_CASE("programs without matches are final for every oracle") {
  Explorer ex(defaults());
  auto ast = parse_c("int x;\nx = 1;\n");
  ScriptedOracle s(parse_script(kScript), ex);
  GreedyOracle g(ex);
  LookaheadOracle l(ex, 2);
  InteractiveOracle i(ex);
  for (Oracle* o : std::vector<Oracle*>{&s, &g, &l, &i}) {
    CAPTURE(o->name());
    CHECK(o->is_final(ast));
    CHECK(run_derivation(ast, *o, ex, 10).steps.empty());
  }
}

TEST_CASE("greedy never increases the metric") {
  Explorer ex(defaults());
  GreedyOracle g(ex);
  Metric m = default_metric();
  Derivation d = run_derivation(step(0), g, ex, 50);
  CHECK(d.status == DerivationStatus::Final);
  CHECK(!d.steps.empty());
  double prev = m.score(step(0));
  AnnotatedAst cur = step(0);
  for (const auto& s : d.steps) {
    CHECK(s.before_hash == cur.digest());
    for (const auto& succ : ex.successors(cur))
      if (succ.record.after_hash == s.after_hash) {
        cur = succ.code;
        break;
      }
    double now = m.score(cur);
    CHECK(now <= prev);
    prev = now;
  }
}

TEST_CASE("greedy stalls on the local minimum, lookahead does not") {
  Explorer ex(defaults());
  auto lm = parse_c(corpus("local_minimum.c"));
  GreedyOracle g(ex);
  CHECK(g.is_final(lm));
  CHECK(run_derivation(lm, g, ex, 50).steps.empty());

  LookaheadOracle l(ex, 2);
  CHECK_FALSE(l.is_final(lm));
  Derivation d = run_derivation(lm, l, ex, 50);
  CHECK(d.status == DerivationStatus::Final);
  CHECK(default_metric().score(d.result) < default_metric().score(lm));
  CHECK(print_c(d.result) == print_c(step(4)));
}

TEST_CASE("lookahead never prefers a worse reachable metric than greedy") {
  Explorer ex(defaults());
  LookaheadOracle l(ex, 2);
  GreedyOracle g(ex);
  for (int k = 0; k <= 4; ++k) {
    CAPTURE(k);
    auto cands = candidates_for(step(k), all_rules(), ex);
    if (cands.empty()) continue;
    auto dl = l.select_rule(cands);
    auto dg = g.select_rule(cands);
    CHECK(l.score(cands[dl.choice].code, 1) <= l.score(cands[dg.choice].code, 1));
  }
}

TEST_CASE("interactive oracle waits for a decision") {
  Explorer ex(defaults());
  InteractiveOracle o(ex);
  Derivation result;
  std::thread driver([&] { result = run_derivation(step(0), o, ex, 10); });
  auto wait_pending = [&] {
    for (int i = 0; i < 2000; ++i) {
      if (auto p = o.pending()) return *p;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    FAIL("no pending decision");
    return std::vector<Candidate>{};
  };
  auto first = wait_pending();
  std::size_t fusion = 0;
  for (std::size_t i = 0; i < first.size(); ++i)
    if (first[i].rule == "For-LoopFusion") fusion = i;
  o.decide({fusion, "AugAdditionAssign"});
  auto second = wait_pending();
  CHECK(second.size() == 1);
  CHECK(second[0].rule == "AugAdditionAssign");
  o.finish();
  driver.join();
  REQUIRE(result.steps.size() == 1);
  CHECK(print_c(result.result) == print_c(step(1)));
}
