#include <algorithm>

#include "stml/error.hpp"
#include "stml/frontend.hpp"
#include "stml/semantics.hpp"

namespace stml {

Node Location::expr() const {
  if (indices.empty()) return Node::var(base);
  std::vector<Node> kids{Node::var(base)};
  kids.insert(kids.end(), indices.begin(), indices.end());
  return Node::make(NodeKind::Index, {}, std::move(kids));
}

std::string Location::str() const { return print_expr(expr()); }

std::set<std::string> AccessSet::written_bases() const {
  std::set<std::string> out;
  for (const auto& w : writes) out.insert(w.base);
  return out;
}

namespace {

// `i++` in an index denotes the location at the old value of `i`.
Node normalize_index(const Node& e) {
  if (e.kind == NodeKind::UnaryOp && (e.text == "++" || e.text == "--")) {
    Node inner = normalize_index(e.children[0]);
    if (e.postfix) return inner;
    return Node::make(NodeKind::BinOp, e.text == "++" ? "+" : "-", {std::move(inner), Node::integer(1)});
  }
  Node out = e;
  for (auto& c : out.children) c = normalize_index(c);
  return out;
}

std::optional<Location> location_of(const Node& e) {
  if (e.kind == NodeKind::Var) return Location{e.text, {}};
  if (e.kind == NodeKind::Index && !e.children.empty() && e.children[0].kind == NodeKind::Var) {
    Location l{e.children[0].text, {}};
    for (std::size_t k = 1; k < e.children.size(); ++k) l.indices.push_back(normalize_index(e.children[k]));
    return l;
  }
  return std::nullopt;
}

std::optional<std::int64_t> int_literal(const Node& e) {
  if (e.kind == NodeKind::IntLit) return std::stoll(e.text);
  if (e.kind == NodeKind::UnaryOp && e.text == "-" && e.children[0].kind == NodeKind::IntLit)
    return -std::stoll(e.children[0].text);
  return std::nullopt;
}

// Index of the form `var + k`, `k + var`, `var - k`, `var` or `k`.
struct Linear {
  std::string var;  // empty for a constant
  std::int64_t k = 0;
};

std::optional<Linear> linear(const Node& e) {
  if (auto k = int_literal(e)) return Linear{{}, *k};
  if (e.kind == NodeKind::Var) return Linear{e.text, 0};
  if (e.kind == NodeKind::BinOp && (e.text == "+" || e.text == "-")) {
    const Node& a = e.children[0];
    const Node& b = e.children[1];
    auto kb = int_literal(b);
    if (a.kind == NodeKind::Var && kb) return Linear{a.text, e.text == "+" ? *kb : -*kb};
    auto ka = int_literal(a);
    if (e.text == "+" && ka && b.kind == NodeKind::Var) return Linear{b.text, *ka};
  }
  return std::nullopt;
}

class Collector {
 public:
  Collector(const PropertyStore& store, const std::optional<std::string>& loop_var, AccessSet& out)
      : store_(store), loop_var_(loop_var), out_(out) {}

  void stmt(const Node& s) {
    switch (s.kind) {
      case NodeKind::Decl:
        for (const auto& d : s.children) {
          for (int k = 0; k < d.dims; ++k) expr(d.children[k]);
          if (d.has_init()) expr(d.children.back());
          out_.writes.insert(Location{d.text, {}});
        }
        return;
      case NodeKind::FuncDef:
        return;  // definitions do not execute
      case NodeKind::Return:
        out_.unknown = true;  // leaves the enclosing code
        expr(s.children[0]);
        return;
      case NodeKind::For:
        if (s.children[0].kind == NodeKind::Decl) stmt(s.children[0]);
        else expr(s.children[0]);
        expr(s.children[1]);
        expr(s.children[2]);
        stmt(s.children[3]);
        return;
      case NodeKind::ExprStmt:
        expr(s.children[0]);
        return;
      case NodeKind::TranslationUnit:
      case NodeKind::Block:
      case NodeKind::While:
      case NodeKind::If:
        for (const auto& c : s.children) is_expression(c.kind) ? expr(c) : stmt(c);
        return;
      default:
        if (is_expression(s.kind)) expr(s);
        return;
    }
  }

  void expr(const Node& e) {
    switch (e.kind) {
      case NodeKind::Var:
      case NodeKind::Index:
        subscripts(e);
        access(e, AccessMode::Read);
        return;
      case NodeKind::Assign:
        subscripts(e.children[0]);
        expr(e.children[1]);
        access(e.children[0], AccessMode::Write);
        return;
      case NodeKind::AugAssign:
        subscripts(e.children[0]);
        access(e.children[0], AccessMode::Read);
        expr(e.children[1]);
        access(e.children[0], AccessMode::Write);
        return;
      case NodeKind::UnaryOp:
        if (e.text == "++" || e.text == "--") {
          subscripts(e.children[0]);
          access(e.children[0], AccessMode::Read);
          access(e.children[0], AccessMode::Write);
          return;
        }
        expr(e.children[0]);
        return;
      case NodeKind::Call:
        for (const auto& a : e.children) expr(a);
        if (!store_.pure_function(e.text)) {
          out_.unknown = true;
          out_.impure_calls.insert(e.text);
        }
        return;
      default:
        for (const auto& c : e.children) expr(c);
        return;
    }
  }

 private:
  void subscripts(const Node& lv) {
    if (lv.kind != NodeKind::Index) return;
    for (std::size_t k = 1; k < lv.children.size(); ++k) expr(lv.children[k]);
  }

  void access(const Node& lv, AccessMode mode) {
    auto loc = location_of(lv);
    if (!loc) {
      out_.unknown = true;
      return;
    }
    (mode == AccessMode::Read ? out_.reads : out_.writes).insert(*loc);
    if (!loop_var_ || loc->indices.empty()) return;
    std::optional<Linear> lin;
    if (loc->indices.size() == 1) lin = linear(loc->indices[0]);
    if (lin && lin->var == *loop_var_) {
      out_.offsets[{loc->base, mode}].insert(lin->k);
    } else {
      out_.unknown_offsets.insert(loc->base);
    }
  }

  const PropertyStore& store_;
  const std::optional<std::string>& loop_var_;
  AccessSet& out_;
};

AccessSet collect(const std::vector<Node>& fragment, const PropertyStore& store,
                  const std::optional<std::string>& loop_var) {
  AccessSet out;
  Collector c(store, loop_var, out);
  for (const auto& n : fragment) {
    if (is_expression(n.kind)) c.expr(n);
    else c.stmt(n);
  }
  return out;
}

}  // namespace

AccessSet access_set(const std::vector<Node>& fragment, const PropertyStore& store,
                     const std::optional<std::string>& loop_var) {
  return collect(fragment, store, loop_var);
}

AccessSet access_set(const AnnotatedAst& ast, NodeId at, const std::optional<std::string>& loop_var) {
  const Node* n = ast.find(at);
  if (!n) return {};
  PropertyStore store(ast);
  return collect({*n}, store, loop_var);
}

// ---------------------------------------------------------------------------
// Predicates

namespace {

enum class Alias { No, Yes, Maybe };

struct AliasContext {
  std::set<std::string> written;        // scalars written by either side
  std::optional<std::string> loop_var;  // the loop variable E, when given
};

bool mentions_unstable(const Node& e, const AliasContext& ctx) {
  bool bad = false;
  for_each_node(e, [&](const Node& n) {
    if (n.kind == NodeKind::Var && (ctx.written.count(n.text) || (ctx.loop_var && n.text == *ctx.loop_var)))
      bad = true;
    if (n.kind == NodeKind::Call || n.kind == NodeKind::Assign || n.kind == NodeKind::AugAssign ||
        (n.kind == NodeKind::UnaryOp && (n.text == "++" || n.text == "--")))
      bad = true;
  });
  return bad;
}

Alias index_alias(const Node& a, const Node& b, const AliasContext& ctx) {
  auto la = linear(a);
  auto lb = linear(b);
  if (la && lb) {
    if (la->var.empty() && lb->var.empty()) return la->k == lb->k ? Alias::Yes : Alias::No;
    if (la->var == lb->var) {
      bool stable = !ctx.written.count(la->var) && !(ctx.loop_var && la->var == *ctx.loop_var);
      if (la->k == lb->k) return stable ? Alias::Yes : Alias::Maybe;
      return stable ? Alias::No : Alias::Maybe;
    }
    return Alias::Maybe;
  }
  if (structurally_equal(a, b, false) && !mentions_unstable(a, ctx)) return Alias::Yes;
  return Alias::Maybe;
}

Alias location_alias(const Location& a, const Location& b, const AliasContext& ctx) {
  if (a.base != b.base) return Alias::No;
  if (a.indices.empty() || b.indices.empty()) return Alias::Yes;
  if (a.indices.size() != b.indices.size()) return Alias::Maybe;
  bool all_yes = true;
  for (std::size_t k = 0; k < a.indices.size(); ++k) {
    Alias d = index_alias(a.indices[k], b.indices[k], ctx);
    if (d == Alias::No) return Alias::No;
    if (d == Alias::Maybe) all_yes = false;
  }
  return all_yes ? Alias::Yes : Alias::Maybe;
}

bool bare_lvalue(const Node& n) { return n.kind == NodeKind::Var || n.kind == NodeKind::Index; }

// Access set of a predicate argument. Lists and bare lvalues stand for
// the locations they mention, as both read and written.
AccessSet arg_access(const PredArg& arg, const PropertyStore& store, const std::optional<std::string>& loop_var) {
  AccessSet s = collect(arg.nodes, store, loop_var);
  bool mention = arg.list || (arg.nodes.size() == 1 && bare_lvalue(arg.nodes[0]));
  if (!mention) return s;
  for (const auto& n : arg.nodes)
    if (auto loc = location_of(n)) s.writes.insert(*loc);
  for (const auto& w : s.writes) s.reads.insert(w);
  return s;
}

std::set<std::string> scalar_writes(const AccessSet& a) {
  std::set<std::string> out;
  for (const auto& w : a.writes)
    if (w.indices.empty()) out.insert(w.base);
  return out;
}

// No location in `writes` may alias one in `reads`. Bases in `skip` are ignored.
Tri disjoint(const std::set<Location>& writes, const std::set<Location>& reads, const AliasContext& ctx,
             const std::set<std::string>& skip) {
  Tri result = Tri::True;
  for (const auto& w : writes) {
    if (skip.count(w.base)) continue;
    for (const auto& r : reads) {
      if (skip.count(r.base)) continue;
      Alias a = location_alias(w, r, ctx);
      if (a == Alias::Yes) return Tri::False;
      if (a == Alias::Maybe) result = Tri::Unknown;
    }
  }
  return result;
}

Tri no_write(const AccessSet& x, const AccessSet& y, const std::optional<std::string>& loop_var,
             const std::set<std::string>& skip = {}) {
  AliasContext ctx;
  ctx.written = scalar_writes(x);
  auto yw = scalar_writes(y);
  ctx.written.insert(yw.begin(), yw.end());
  ctx.loop_var = loop_var;
  Tri t = disjoint(x.writes, y.reads, ctx, skip);
  if (t != Tri::False && (x.unknown || y.unknown)) t = Tri::Unknown;
  return t;
}

std::optional<std::string> loop_var_of(const PredArg& arg) {
  if (arg.nodes.size() == 1 && arg.nodes[0].kind == NodeKind::Var) return arg.nodes[0].text;
  return std::nullopt;
}

// Arrays whose every access in x and y is one-dimensional `E + k`.
std::set<std::string> offset_arrays(const AccessSet& x, const AccessSet& y) {
  std::set<std::string> out;
  for (const AccessSet* s : {&x, &y})
    for (const auto& [key, offs] : s->offsets) out.insert(key.first);
  for (const AccessSet* s : {&x, &y})
    for (const auto& b : s->unknown_offsets) out.erase(b);
  return out;
}

const std::set<std::int64_t>* offsets(const AccessSet& s, const std::string& base, AccessMode m) {
  auto it = s.offsets.find({base, m});
  return it == s.offsets.end() ? nullptr : &it->second;
}

// Arrays x accesses at non-offset subscripts that y also touches.
bool irregular_overlap(const AccessSet& x, const AccessSet& y) {
  for (const auto& b : x.unknown_offsets) {
    if (y.unknown_offsets.count(b)) return true;
    for (const auto& [key, offs] : y.offsets)
      if (key.first == b) return true;
  }
  return false;
}

Tri prev_arrays(const AccessSet& x, const AccessSet& y) {
  Tri result = irregular_overlap(x, y) ? Tri::Unknown : Tri::True;
  for (const auto& [key, w] : x.offsets) {
    if (key.second != AccessMode::Write) continue;
    const auto* r = offsets(y, key.first, AccessMode::Read);
    bool y_other = y.unknown_offsets.count(key.first) > 0;
    if (!r && !y_other) continue;
    if (x.unknown_offsets.count(key.first) || y_other) {
      result = Tri::Unknown;
      continue;
    }
    if (*w.begin() < *r->rbegin()) return Tri::False;
  }
  if (result == Tri::True && (x.unknown || y.unknown)) result = Tri::Unknown;
  return result;
}

Tri next_arrays(const AccessSet& x, const AccessSet& y) {
  Tri result = irregular_overlap(x, y) ? Tri::Unknown : Tri::True;
  for (const auto& [key, w] : x.offsets) {
    if (key.second != AccessMode::Write) continue;
    std::set<std::int64_t> touched;
    if (const auto* r = offsets(y, key.first, AccessMode::Read)) touched.insert(r->begin(), r->end());
    if (const auto* yw = offsets(y, key.first, AccessMode::Write)) touched.insert(yw->begin(), yw->end());
    bool y_other = y.unknown_offsets.count(key.first) > 0;
    if (touched.empty() && !y_other) continue;
    if (x.unknown_offsets.count(key.first) || y_other) {
      result = Tri::Unknown;
      continue;
    }
    if (*w.rbegin() > *touched.begin()) return Tri::False;
  }
  if (result == Tri::True && (x.unknown || y.unknown)) result = Tri::Unknown;
  return result;
}

bool occurs(const Node& needle, const Node& hay) {
  if (structurally_equal(needle, hay, false)) return true;
  for (const auto& c : hay.children)
    if (occurs(needle, c)) return true;
  return false;
}

std::string operator_name(const Node& n) { return n.text; }

}  // namespace

std::optional<std::size_t> predicate_arity(const std::string& name) {
  static const std::map<std::string, std::size_t> arity = {
      {"no_write", 2},         {"no_write_except_arrays", 3}, {"no_write_prev_arrays", 3},
      {"no_write_next_arrays", 3}, {"no_read", 2},             {"pure", 1},
      {"writes", 1},           {"distributes_over", 2},       {"occurs_in", 2},
      {"fresh_var", 1},        {"is_identity", 1},            {"is_assignment", 1},
      {"is_subseteq", 2}};
  auto it = arity.find(name);
  if (it == arity.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<Node>> writes_of(const PredArg& arg, const PropertyStore& store) {
  if (arg.list) return arg.nodes;
  AccessSet s = collect(arg.nodes, store, std::nullopt);
  if (s.unknown) return std::nullopt;
  std::vector<Node> out;
  for (const auto& w : s.writes) out.push_back(w.expr());
  return out;
}

Tri eval_predicate(const std::string& name, const std::vector<PredArg>& args, const PropertyStore& store,
                   NodeId pos) {
  auto arity = predicate_arity(name);
  if (!arity) throw PredicateArityError("unknown predicate '" + name + "'");
  if (args.size() != *arity)
    throw PredicateArityError("'" + name + "' takes " + std::to_string(*arity) + " arguments, got " +
                              std::to_string(args.size()));

  if (name == "pure") {
    AccessSet s = collect(args[0].nodes, store, std::nullopt);
    if (!s.writes.empty()) return Tri::False;
    return s.unknown ? Tri::Unknown : Tri::True;
  }
  if (name == "writes") {
    auto w = writes_of(args[0], store);
    if (!w) return Tri::Unknown;
    return w->empty() ? Tri::False : Tri::True;
  }
  if (name == "no_write") {
    return no_write(arg_access(args[0], store, {}), arg_access(args[1], store, {}), std::nullopt);
  }
  if (name == "no_read") {
    // x reads nothing that y writes.
    AccessSet x = arg_access(args[0], store, {});
    AccessSet y = arg_access(args[1], store, {});
    AliasContext ctx;
    ctx.written = scalar_writes(x);
    auto yw = scalar_writes(y);
    ctx.written.insert(yw.begin(), yw.end());
    Tri t = disjoint(y.writes, x.reads, ctx, {});
    if (t != Tri::False && (x.unknown || y.unknown)) t = Tri::Unknown;
    return t;
  }
  if (name == "no_write_except_arrays" || name == "no_write_prev_arrays" || name == "no_write_next_arrays") {
    auto e = loop_var_of(args[2]);
    if (!e) return Tri::Unknown;
    AccessSet x = arg_access(args[0], store, e);
    AccessSet y = arg_access(args[1], store, e);
    if (name == "no_write_except_arrays") return no_write(x, y, e, offset_arrays(x, y));
    if (name == "no_write_prev_arrays") return prev_arrays(x, y);
    return next_arrays(x, y);
  }
  if (name == "distributes_over") {
    const Node& g = args[0].nodes.at(0);
    const Node& f = args[1].nodes.at(0);
    std::string gn = operator_name(g), fn = operator_name(f);
    if (store.distributes_fact(gn, fn)) return Tri::True;
    static const std::set<std::string> arith = {"+", "-", "*", "/", "%"};
    if (gn == "*" && (fn == "+" || fn == "-")) return Tri::True;
    if (arith.count(gn) && arith.count(fn)) return Tri::False;
    return Tri::Unknown;
  }
  if (name == "occurs_in") {
    if (args[0].nodes.size() != 1) return Tri::Unknown;
    for (const auto& n : args[1].nodes)
      if (occurs(args[0].nodes[0], n)) return Tri::True;
    return Tri::False;
  }
  if (name == "fresh_var") {
    if (args[0].nodes.size() != 1 || args[0].nodes[0].kind != NodeKind::Var) return Tri::False;
    return store.fresh(args[0].nodes[0].text) ? Tri::True : Tri::False;
  }
  if (name == "is_identity") {
    if (args[0].nodes.size() != 1) return Tri::Unknown;
    const Node& e = args[0].nodes[0];
    if (e.kind == NodeKind::IntLit || e.kind == NodeKind::FloatLit) {
      double v = std::stod(e.text);
      if (v == 0.0 || v == 1.0) return Tri::True;
    }
    if (store.identity_fact_before(e, pos)) return Tri::True;
    if (e.kind == NodeKind::IntLit || e.kind == NodeKind::FloatLit) return Tri::False;
    return Tri::Unknown;
  }
  if (name == "is_assignment") {
    if (args[0].nodes.size() != 1) return Tri::False;
    const Node* e = &args[0].nodes[0];
    if (e->kind == NodeKind::ExprStmt) e = &e->children[0];
    return e->kind == NodeKind::Assign || e->kind == NodeKind::AugAssign ? Tri::True : Tri::False;
  }
  if (name == "is_subseteq") {
    auto locs = [&](const PredArg& a) -> std::optional<std::set<Location>> {
      std::set<Location> out;
      if (a.list) {
        for (const auto& n : a.nodes) {
          auto l = location_of(n);
          if (!l) return std::nullopt;
          out.insert(*l);
        }
        return out;
      }
      AccessSet s = collect(a.nodes, store, std::nullopt);
      if (s.unknown) return std::nullopt;
      out = s.reads;
      out.insert(s.writes.begin(), s.writes.end());
      return out;
    };
    auto a = locs(args[0]);
    auto b = locs(args[1]);
    if (!a || !b) return Tri::Unknown;
    for (const auto& l : *a)
      if (!b->count(l)) return Tri::False;
    return Tri::True;
  }
  throw PredicateArityError("unhandled predicate '" + name + "'");
}

}  // namespace stml
