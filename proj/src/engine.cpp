#include <set>

#include "stml/engine.hpp"
#include "stml/error.hpp"
#include "stml/frontend.hpp"

namespace stml {

std::string_view certainty_name(Certainty c) { return c == Certainty::Proven ? "proven" : "unknown"; }

std::vector<Match> app_rules(const AnnotatedAst& ast, const RuleSet& rules) {
  return app_rules(ast, rules, PropertyStore(ast));
}

std::vector<Match> app_rules(const AnnotatedAst& ast, const RuleSet& rules, const PropertyStore& store) {
  std::vector<Match> out;
  for (NodeId pos = 0; pos < ast.size(); ++pos) {
    for (const auto& rule : rules.rules()) {
      std::size_t variants = variant_count(rule);
      for (const auto& b : match_pattern(rule, ast, pos)) {
        for (auto& res : check_conditions(rule, b, store, pos)) {
          for (std::size_t v = 0; v < variants; ++v) {
            Match m;
            m.rule = rule.name;
            m.pos = pos;
            m.binding = res.binding;
            m.certainty = res.certainty == Tri::True ? Certainty::Proven : Certainty::Unknown;
            m.variant = v;
            m.digest = ast.digest();
            out.push_back(std::move(m));
          }
        }
      }
    }
  }
  return out;
}

namespace {

void facts_by_id(const Node& n, std::map<NodeId, const Node*>& out) {
  for_each_node(n, [&](const Node& x) {
    if (!x.props.empty()) out.emplace(x.id, &x);
  });
}

void ids_of(const Node& n, std::set<NodeId>& out) {
  for_each_node(n, [&](const Node& x) {
    if (x.id != 0) out.insert(x.id);
  });
}

void attach(Node& n, const std::vector<Property>& facts) {
  for (const auto& f : facts) {
    bool dup = false;
    for (const auto& p : n.props)
      if (same_fact(p, f)) dup = true;
    if (!dup) n.props.push_back(f);
  }
}

std::string flat_code(const std::vector<Node>& ns) {
  std::string out;
  for (const auto& n : ns) out += is_expression(n.kind) ? print_expr(n) : print_node(n);
  return out;
}

}  // namespace

TransResult trans(const AnnotatedAst& ast, const Match& match, const RuleSet& rules, bool override_unknown) {
  if (match.digest != ast.digest())
    throw StaleMatch("match for " + match.rule + " was computed on " + match.digest + ", current code is " +
                     ast.digest());
  if (match.certainty == Certainty::Unknown && !override_unknown)
    throw UnsafeApplication(match.rule + " at node " + std::to_string(match.pos) +
                            " has undecided conditions; an explicit override is required");
  const Rule* rule = rules.find(match.rule);
  if (!rule) throw StaleMatch("rule " + match.rule + " is not loaded");
  if (!ast.find(match.pos)) throw StaleMatch("position " + std::to_string(match.pos) + " does not exist");

  PropertyStore store(ast);
  Instance inst = instantiate(*rule, match.binding, store, match.pos, match.variant);

  Node root = ast.root();
  Node* target = find_node(root, match.pos);

  std::vector<Node> old_nodes;
  std::vector<Node> new_nodes;
  std::vector<Warning> warnings;

  if (rule->shape == PatternShape::Expression) {
    old_nodes = {*target};
    new_nodes = {*inst.expression};
    // Facts asserted by the rule go to the statement holding the expression.
    NodeId holder = match.pos;
    while (!is_statement(ast.find(holder)->kind)) {
      auto p = ast.parent(holder);
      if (!p) break;
      holder = *p;
    }
    Node* stmt = find_node(root, holder);
    *target = *inst.expression;
    if (stmt && stmt != target) attach(*stmt, inst.asserts);
  } else {
    std::vector<Node> gen = std::move(inst.statements);
    if (!inst.asserts.empty()) {
      Node* anchor = nullptr;
      for (auto& s : gen)
        if (s.id == 0) {
          anchor = &s;
          break;
        }
      if (!anchor && !gen.empty()) anchor = &gen.front();
      if (anchor) attach(*anchor, inst.asserts);
    }
    new_nodes = gen;
    if (rule->shape == PatternShape::Sequence) {
      old_nodes = target->children;
      target->children = std::move(gen);
      if (new_nodes.empty()) attach(*target, inst.asserts);
    } else {
      old_nodes = {*target};
      auto parent_id = ast.parent(match.pos);
      if (!parent_id) throw InstantiationError("statement rule matched at the root");
      Node* parent = find_node(root, *parent_id);
      if (parent->kind == NodeKind::Block || parent->kind == NodeKind::TranslationUnit) {
        auto it = std::find_if(parent->children.begin(), parent->children.end(),
                               [&](const Node& c) { return c.id == match.pos; });
        it = parent->children.erase(it);
        parent->children.insert(it, gen.begin(), gen.end());
      } else if (gen.size() == 1) {
        *target = std::move(gen.front());
      } else {
        Node blk = Node::make(NodeKind::Block);
        blk.children = std::move(gen);
        *target = std::move(blk);
      }
    }
  }

  // Facts on nodes that did not survive the rewrite are dropped.
  std::map<NodeId, const Node*> had;
  for (const auto& n : old_nodes) facts_by_id(n, had);
  std::set<NodeId> kept;
  for (const auto& n : new_nodes) ids_of(n, kept);
  for (const auto& [id, node] : had) {
    if (kept.count(id)) continue;
    for (const auto& p : node->props) {
      bool reasserted = false;
      for (const auto& a : inst.asserts)
        if (same_fact(a, p)) reasserted = true;
      if (reasserted) continue;
      Warning w;
      w.kind = "dropped-fact";
      w.node = id;
      w.line = node->line;
      w.rejected = p.pragma_line();
      w.message = match.rule + " replaced the node carrying '" + p.body() + "'; the fact was dropped";
      warnings.push_back(std::move(w));
    }
  }

  TransResult r{AnnotatedAst(std::move(root)), {}};
  r.record.match = match;
  r.record.before_hash = ast.digest();
  r.record.after_hash = r.ast.digest();
  r.record.diff = diff(ast, r.ast);
  r.record.old_code = flat_code(old_nodes);
  r.record.new_code = flat_code(new_nodes);
  r.record.overridden = match.certainty == Certainty::Unknown;
  r.record.warnings = std::move(warnings);
  return r;
}

const StepRecord& History::push(TransResult r) {
  if (r.record.before_hash != current().digest())
    throw StaleMatch("step does not start from the current state");
  r.record.index = records_.size();
  states_.push_back(std::move(r.ast));
  records_.push_back(std::move(r.record));
  return records_.back();
}

const AnnotatedAst& History::undo() {
  if (records_.empty()) throw EmptyHistory("nothing to undo");
  states_.pop_back();
  records_.pop_back();
  return current();
}

}  // namespace stml
