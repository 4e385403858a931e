#include <functional>
#include <json.hpp>
#include <regex>
#include <sstream>

#include "parser.hpp"
#include "stml/error.hpp"
#include "stml/frontend.hpp"
#include "stml/semantics.hpp"

namespace stml {

std::string_view tri_name(Tri t) {
  switch (t) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    case Tri::Unknown: return "unknown";
  }
  return "?";
}

Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
  return Tri::True;
}

Tri tri_not(Tri t) {
  if (t == Tri::Unknown) return t;
  return t == Tri::True ? Tri::False : Tri::True;
}

std::string Warning::json() const {
  nlohmann::json j{{"kind", kind}, {"message", message}, {"node", node}, {"line", line}};
  if (!kept.empty()) j["kept"] = kept;
  if (!rejected.empty()) j["rejected"] = rejected;
  return j.dump();
}

bool is_builtin_function(const std::string& name) {
  static const std::set<std::string> builtins = {"sqrt", "fabs", "exp",  "log",  "sin", "cos",
                                                 "tan",  "floor", "ceil", "pow", "fmin", "fmax", "abs"};
  return builtins.count(name) > 0;
}

PropertyStore::PropertyStore(const AnnotatedAst& ast) : identifiers_(ast.identifiers()) {
  for_each_node(ast.root(), [&](const Node& n) {
    for (const auto& p : n.props) all_.emplace_back(n.id, p);
    if (!n.props.empty()) by_node_[n.id] = n.props;
  });
}

const std::vector<Property>& PropertyStore::at(NodeId id) const {
  static const std::vector<Property> none;
  auto it = by_node_.find(id);
  return it == by_node_.end() ? none : it->second;
}

bool PropertyStore::pure_function(const std::string& name) const {
  if (is_builtin_function(name)) return true;
  for (const auto& [id, p] : all_)
    if (p.dialect == Dialect::Stml && p.keyword == "pure" && p.args.size() == 1 &&
        p.args[0].kind == NodeKind::Var && p.args[0].text == name)
      return true;
  return false;
}

bool PropertyStore::distributes_fact(const std::string& g, const std::string& f) const {
  for (const auto& [id, p] : all_)
    if (p.keyword == "distributes_over" && p.args.size() == 2 && p.args[0].text == g && p.args[1].text == f)
      return true;
  return false;
}

bool PropertyStore::identity_fact_before(const Node& e, NodeId pos) const {
  for (const auto& [id, p] : all_)
    if (id < pos && p.keyword == "is_identity" && p.args.size() == 1 &&
        structurally_equal(p.args[0], e, false))
      return true;
  return false;
}

// ---------------------------------------------------------------------------
// Conflicts

namespace {

std::string subject(const Property& p) {
  if (p.args.empty()) return {};
  const Node& a = p.args[0];
  if (a.kind == NodeKind::Call) return a.text;
  if (a.kind == NodeKind::Index && !a.children.empty()) return a.children[0].text;
  return print_expr(a);
}

bool writes_something(const Property& p) {
  if (p.keyword == "write") return !p.locations.empty();
  return p.keyword == "writes" || p.keyword == "rw";
}

}  // namespace

bool facts_conflict(const Property& a, const Property& b) {
  if (a.dialect != Dialect::Stml || b.dialect != Dialect::Stml) return false;
  if (same_fact(a, b)) return false;
  if (a.keyword == "pure" && writes_something(b)) return subject(a) == subject(b);
  if (b.keyword == "pure" && writes_something(a)) return subject(a) == subject(b);
  if (a.keyword != b.keyword) return false;
  if (a.keyword == "iteration_space") return true;
  if (a.keyword == "reads" || a.keyword == "writes" || a.keyword == "rw" || a.keyword == "write")
    return subject(a) == subject(b) && a.args.size() == b.args.size() &&
           structurally_equal(a.args, b.args, false);
  return false;
}

namespace {

enum class Merge { Added, Duplicate, Conflict };

// Adds `fact` to `node` at `where` unless it duplicates or contradicts an
// existing fact; the existing fact always wins.
Merge merge_fact(Node& node, Property fact, std::size_t where, std::vector<Warning>* warnings) {
  for (const auto& p : node.props)
    if (same_fact(p, fact)) return Merge::Duplicate;
  for (const auto& p : node.props) {
    if (facts_conflict(p, fact)) {
      if (warnings) {
        Warning w;
        w.kind = "conflict";
        w.node = node.id;
        w.line = node.line;
        w.kept = p.pragma_line();
        w.rejected = fact.pragma_line();
        w.message = std::string(provenance_name(fact.provenance)) + " fact '" + fact.body() +
                    "' contradicts " + std::string(provenance_name(p.provenance)) + " fact '" + p.body() +
                    "'; keeping the latter";
        warnings->push_back(std::move(w));
      }
      return Merge::Conflict;
    }
  }
  node.props.insert(node.props.begin() + static_cast<std::ptrdiff_t>(std::min(where, node.props.size())),
                    std::move(fact));
  return Merge::Added;
}

Property stml_fact(const std::string& body, int line) {
  Property p = detail::parse_pragma("stml " + body, line, false);
  p.provenance = Provenance::Lowered;
  return p;
}

std::vector<std::string> skeleton_facts(const Property& p) {
  auto a = [&](std::size_t i) { return print_expr(p.args[i]); };
  auto need = [&](std::size_t n) {
    if (p.args.size() != n)
      throw LoweringError("line " + std::to_string(p.line) + ": polca " + p.keyword + " takes " +
                          std::to_string(n) + " arguments, got " + std::to_string(p.args.size()));
  };
  const std::string& k = p.keyword;
  if (k == "map") {
    need(3);
    return {"reads " + a(1) + " in {0}", "writes " + a(2) + " in {0}", "same_length " + a(1) + " " + a(2),
            "pure " + a(0), "iteration_space 0 length(" + a(1) + ")", "iteration_independent"};
  }
  if (k == "zipWith") {
    need(4);
    return {"reads " + a(1) + " in {0}",
            "reads " + a(2) + " in {0}",
            "writes " + a(3) + " in {0}",
            "same_length " + a(1) + " " + a(2),
            "same_length " + a(1) + " " + a(3),
            "pure " + a(0),
            "iteration_space 0 length(" + a(1) + ")",
            "iteration_independent"};
  }
  if (k == "fold") {
    need(4);
    return {"reads " + a(2) + " in {0}", "reads output(" + a(1) + ")", "writes " + a(3), "pure " + a(0),
            "iteration_space 0 length(" + a(2) + ")"};
  }
  if (k == "scanl") {
    need(4);
    return {"reads output(" + a(1) + ")",   "reads " + a(2) + " in {0}", "reads " + a(3) + " in {0}",
            "writes " + a(3) + " in {1}",   "pure " + a(0),
            "iteration_space 0 length(" + a(2) + ")"};
  }
  need(1);  // def, input, output
  return {};
}

void lower_node(Node& n, std::vector<Warning>* warnings) {
  for (std::size_t i = 0; i < n.props.size(); ++i) {
    if (n.props[i].dialect != Dialect::Polca) continue;
    std::vector<std::string> facts = skeleton_facts(n.props[i]);
    int line = n.props[i].line;
    std::size_t at = i + 1;
    for (const auto& body : facts) {
      if (merge_fact(n, stml_fact(body, line), at, warnings) == Merge::Added) ++at;
    }
  }
  for (auto& c : n.children) lower_node(c, warnings);
}

}  // namespace

AnnotatedAst lower_polca(const AnnotatedAst& ast, std::vector<Warning>* warnings) {
  Node root = ast.root();
  lower_node(root, warnings);
  return AnnotatedAst(std::move(root));
}

AnnotatedAst ingest_properties(const AnnotatedAst& ast, std::string_view sidecar, std::vector<Warning>* warnings) {
  static const std::regex line_re(R"(^\s*(.*):(\d+):\s*#\s*pragma\s+(.*?)\s*$)");
  Node root = ast.root();
  std::istringstream in{std::string(sidecar)};
  std::string text;
  int lineno = 0;
  while (std::getline(in, text)) {
    ++lineno;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::smatch m;
    if (!std::regex_match(text, m, line_re))
      throw PragmaError("sidecar line " + std::to_string(lineno) + ": expected '<file>:<line>: #pragma stml ...'");
    int anchor = std::stoi(m[2]);
    std::string body = m[3];
    if (body.rfind("stml", 0) != 0)
      throw PragmaError("sidecar line " + std::to_string(lineno) + ": only stml properties can be ingested");
    Property fact = detail::parse_pragma(body, anchor, false);
    fact.provenance = Provenance::ExternalTool;

    Node* target = nullptr;
    std::function<void(Node&)> find = [&](Node& n) {
      if (target) return;
      if (is_statement(n.kind) && n.line == anchor) {
        target = &n;
        return;
      }
      for (auto& c : n.children) find(c);
    };
    find(root);
    if (!target) throw AnchorError(std::string(m[1]) + ":" + std::to_string(anchor) + ": no statement starts on this line");
    merge_fact(*target, std::move(fact), target->props.size(), warnings);
  }
  return AnnotatedAst(std::move(root));
}

}  // namespace stml
