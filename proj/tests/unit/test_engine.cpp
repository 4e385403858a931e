#include <doctest.h>

#include "corpus.hpp"
#include "stml/engine.hpp"
#include "stml/error.hpp"
#include "stml/frontend.hpp"

using namespace stml;
using stml::testing::corpus;

namespace {

const RuleSet& defaults() {
  static const RuleSet rules = load_rules(STML_DEFAULT_RULES);
  return rules;
}

const std::vector<std::string> kScript = {"For-LoopFusion", "AugAdditionAssign", "JoinAssignments", "UndoDistribute",
                                          "LoopInvCodeMotion"};

std::vector<Match> proven(const AnnotatedAst& ast, const std::string& rule) {
  std::vector<Match> out;
  for (auto& m : app_rules(ast, defaults()))
    if (m.rule == rule && m.certainty == Certainty::Proven) out.push_back(m);
  return out;
}

AnnotatedAst step(int k) { return parse_c(corpus("deriv_step" + std::to_string(k) + ".c")); }

// Renames the fresh variable so the result can be compared with the panel.
AnnotatedAst rename_fresh(const AnnotatedAst& ast, const std::string& name) {
  std::string text = print_c(ast);
  for (std::size_t p; (p = text.find("__stml_0")) != std::string::npos;) text.replace(p, 8, name);
  return parse_c(text);
}

}  // namespace

TEST_CASE("empty program has no matches") { CHECK(app_rules(parse_c(""), defaults()).empty()); }

TEST_CASE("step 0 offers a proven loop fusion") {
  auto ms = proven(step(0), "For-LoopFusion");
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].pos == 0);
}

TEST_CASE("the five-step derivation reproduces every panel") {
  AnnotatedAst cur = step(0);
  for (int k = 0; k < 5; ++k) {
    CAPTURE(k);
    auto ms = proven(cur, kScript[k]);
    REQUIRE(ms.size() == 1);
    cur = trans(cur, ms[0], defaults()).ast;
    AnnotatedAst expected = step(k + 1);
    AnnotatedAst got = k == 4 ? rename_fresh(cur, "k") : cur;
    CHECK(print_c(got) == print_c(expected));
    CHECK(structurally_equal(got.root(), expected.root()));
  }
}

TEST_CASE("undistribution on step 3") {
  auto ms = proven(step(3), "UndoDistribute");
  REQUIRE(ms.size() == 1);
  auto r = trans(step(3), ms[0], defaults());
  CHECK(r.record.old_code == "a * v[i] + b * v[i]");
  CHECK(r.record.new_code == "(a + b) * v[i]");
}

TEST_CASE("nothing undoes the hoisting on step 5") {
  AnnotatedAst s5 = step(5);
  for (const auto& m : app_rules(s5, defaults())) {
    if (m.certainty != Certainty::Proven) continue;
    AnnotatedAst next = trans(s5, m, defaults()).ast;
    CHECK(print_c(next) != print_c(step(4)));
  }
  CHECK(proven(s5, "LoopInvCodeMotion").empty());
}

TEST_CASE("match ordering is deterministic") {
  auto a = app_rules(step(2), defaults());
  auto b = app_rules(step(2), defaults());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rule == b[i].rule);
    CHECK(a[i].pos == b[i].pos);
    CHECK(binding_text(a[i].binding) == binding_text(b[i].binding));
  }
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].pos <= a[i].pos);
}

TEST_CASE("stale and unsafe applications are refused") {
  AnnotatedAst s0 = step(0);
  Match fusion = proven(s0, "For-LoopFusion").at(0);
  AnnotatedAst s1 = trans(s0, fusion, defaults()).ast;
  CHECK_THROWS_AS(trans(s1, fusion, defaults()), StaleMatch);

  auto ast = parse_c("float x[4], c[4], y;\nfor (int i = 0; i < 4; i++)\n  x[i] = g(y);\nfor (int i = 0; i < 4; i++)\n  c[i] = 1;\n");
  Match unknown;
  bool found = false;
  for (auto& m : app_rules(ast, defaults()))
    if (m.rule == "For-LoopFusion" && m.certainty == Certainty::Unknown) {
      unknown = m;
      found = true;
    }
  REQUIRE(found);
  CHECK_THROWS_AS(trans(ast, unknown, defaults()), UnsafeApplication);
  auto forced = trans(ast, unknown, defaults(), true);
  CHECK(forced.record.overridden);
}

TEST_CASE("history undo restores earlier states") {
  History h(step(0));
  CHECK_THROWS_AS(h.undo(), EmptyHistory);
  std::vector<std::string> hashes{h.current().digest()};
  for (int k = 0; k < 5; ++k) {
    auto ms = proven(h.current(), kScript[k]);
    REQUIRE(ms.size() == 1);
    const StepRecord& r = h.push(trans(h.current(), ms[0], defaults()));
    CHECK(r.index == static_cast<std::size_t>(k));
    CHECK(r.before_hash == hashes.back());
    hashes.push_back(r.after_hash);
  }
  for (int k = 5; k > 0; --k) {
    CHECK(h.current().digest() == hashes[k]);
    h.undo();
  }
  CHECK(h.current().digest() == hashes[0]);
  CHECK(h.empty());
}

TEST_CASE("facts on replaced nodes are dropped with a warning") {
  auto ast = parse_c(
      "float c[N], v[N], a, b;\n"
      "#pragma stml iteration_independent\n"
      "for (int i = 0; i < N; i++)\n  c[i] = a * v[i];\n"
      "for (int i = 0; i < N; i++)\n  c[i] += b * v[i];\n");
  auto ms = proven(ast, "For-LoopFusion");
  REQUIRE(ms.size() == 1);
  auto r = trans(ast, ms[0], defaults());
  REQUIRE(r.record.warnings.size() == 1);
  CHECK(r.record.warnings[0].kind == "dropped-fact");
  CHECK(r.ast.properties().empty());
}

TEST_CASE("facts on untouched nodes survive") {
  auto ast = parse_c(
      "float c[N], v[N], a, b;\n"
      "#pragma stml pure a\n"
      "x = 1;\n"
      "for (int i = 0; i < N; i++)\n  c[i] += b * v[i];\n");
  auto ms = proven(ast, "AugAdditionAssign");
  REQUIRE(ms.size() == 1);
  auto r = trans(ast, ms[0], defaults());
  CHECK(r.record.warnings.empty());
  CHECK(r.ast.properties().size() == 1);
}

TEST_CASE("rule asserts are attached to generated code") {
  RuleSet rs = defaults();
  rs.append(parse_rules(R"(
Swap {
  pattern: { cexpr(a) = cexpr(b) * cexpr(c); }
  generate: { cexpr(a) = cexpr(c) * cexpr(b); }
  assert: {
    #pragma stml writes cexpr(a)
  }
}
)"));
  auto ast = parse_c("x = y * z;\n");
  for (auto& m : app_rules(ast, rs)) {
    if (m.rule != "Swap") continue;
    auto r = trans(ast, m, rs);
    CHECK(print_c(r.ast) == "#pragma stml writes x\nx = z * y;\n");
    CHECK(r.ast.properties().begin()->second[0].provenance == Provenance::RuleAssert);
    return;
  }
  FAIL("no Swap match");
}

TEST_CASE("statement rules in a body slot wrap several statements in a block") {
  auto ast = parse_c("while (n) for (int i = 0; i < 4; i++) c[i] = a + b;\n");
  auto ms = proven(ast, "LoopInvCodeMotion");
  REQUIRE(ms.size() == 1);
  auto r = trans(ast, ms[0], defaults());
  CHECK(print_c(r.ast) ==
        "while (n) {\n  __stml_0 = a + b;\n  for (int i = 0; i < 4; i++)\n    c[i] = __stml_0;\n}\n");
}
