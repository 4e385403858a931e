#include "stml/evaluate.hpp"

#include <cmath>
#include <limits>

#include "stml/error.hpp"
#include "stml/frontend.hpp"

namespace stml {

Value Value::of_int(std::int64_t v) {
  Value out;
  out.type = ElemType::Int;
  out.ints = {v};
  return out;
}

Value Value::of_float(double v) {
  Value out;
  out.type = ElemType::Float;
  out.floats = {v};
  return out;
}

Value Value::zeros(ElemType type, std::vector<std::size_t> shape) {
  Value out;
  out.type = type;
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  out.shape = std::move(shape);
  if (type == ElemType::Int) out.ints.assign(n, 0);
  else out.floats.assign(n, 0.0);
  return out;
}

Value Value::array(std::vector<double> data) {
  Value out;
  out.type = ElemType::Float;
  out.shape = {data.size()};
  out.floats = std::move(data);
  return out;
}

Value Value::int_array(std::vector<std::int64_t> data) {
  Value out;
  out.type = ElemType::Int;
  out.shape = {data.size()};
  out.ints = std::move(data);
  return out;
}

namespace {

struct Scalar {
  bool is_int = true;
  std::int64_t i = 0;
  double f = 0.0;

  static Scalar of(std::int64_t v) { return {true, v, 0.0}; }
  static Scalar of(double v) { return {false, 0, v}; }
  double as_double() const { return is_int ? static_cast<double>(i) : f; }
  bool truthy() const { return is_int ? i != 0 : f != 0.0; }
};

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

std::int64_t to_int(double d) {
  if (!std::isfinite(d) || d >= 9.2233720368547758e18 || d < -9.2233720368547758e18)
    throw EvalError("float value " + std::to_string(d) + " does not fit an int");
  return static_cast<std::int64_t>(d);
}

ElemType elem_type(const std::string& c_type) {
  return c_type == "int" || c_type == "long" ? ElemType::Int : ElemType::Float;
}

Scalar convert(const Scalar& s, ElemType t) {
  if (t == ElemType::Int) return s.is_int ? s : Scalar::of(to_int(s.f));
  return Scalar::of(s.as_double());
}

Scalar arith(const std::string& op, const Scalar& a, const Scalar& b) {
  if (op == "&&") return Scalar::of(std::int64_t{a.truthy() && b.truthy()});
  if (op == "||") return Scalar::of(std::int64_t{a.truthy() || b.truthy()});
  if (op == "<" || op == "<=" || op == ">" || op == ">=" || op == "==" || op == "!=") {
    bool r;
    if (a.is_int && b.is_int) {
      r = op == "<" ? a.i < b.i : op == "<=" ? a.i <= b.i : op == ">" ? a.i > b.i
        : op == ">=" ? a.i >= b.i : op == "==" ? a.i == b.i : a.i != b.i;
    } else {
      double x = a.as_double(), y = b.as_double();
      r = op == "<" ? x < y : op == "<=" ? x <= y : op == ">" ? x > y
        : op == ">=" ? x >= y : op == "==" ? x == y : x != y;
    }
    return Scalar::of(std::int64_t{r});
  }
  if (a.is_int && b.is_int) {
    if (op == "+") return Scalar::of(wrap_add(a.i, b.i));
    if (op == "-") return Scalar::of(wrap_sub(a.i, b.i));
    if (op == "*") return Scalar::of(wrap_mul(a.i, b.i));
    if (op == "/" || op == "%") {
      if (b.i == 0) throw EvalError("integer division by zero");
      if (a.i == std::numeric_limits<std::int64_t>::min() && b.i == -1)
        return Scalar::of(op == "/" ? a.i : std::int64_t{0});
      return Scalar::of(op == "/" ? a.i / b.i : a.i % b.i);
    }
  } else {
    double x = a.as_double(), y = b.as_double();
    if (op == "+") return Scalar::of(x + y);
    if (op == "-") return Scalar::of(x - y);
    if (op == "*") return Scalar::of(x * y);
    if (op == "/") return Scalar::of(x / y);
    if (op == "%") return Scalar::of(std::fmod(x, y));
  }
  throw EvalError("unsupported operator '" + op + "'");
}

struct ReturnSignal {
  Scalar value;
};

class Interpreter {
 public:
  Interpreter(const Env& inputs, const EvalOptions& options) : globals_(inputs), options_(options) {}

  Env run(const Node& tu) {
    for (const auto& s : tu.children)
      if (s.kind == NodeKind::FuncDef) funcs_[s.text] = &s;
    for (const auto& s : tu.children) {
      if (s.kind == NodeKind::FuncDef) continue;
      try {
        exec(s);
      } catch (const ReturnSignal&) {
        throw EvalError("return outside of a function");
      }
    }
    return std::move(globals_);
  }

 private:
  struct Ref {
    Value* value;
    std::size_t flat;
    std::string base;
    std::vector<std::int64_t> indices;
    NodeId node;
  };

  // RAII guard recording the node being evaluated, only when tracing.
  struct Active {
    Active(Interpreter& in, const Node& n) : in_(in) {
      if (in_.options_.tracer) in_.active_.push_back(n.id);
    }
    ~Active() {
      if (in_.options_.tracer) in_.active_.pop_back();
    }
    Interpreter& in_;
  };

  void tick() {
    if (++steps_ > options_.step_budget)
      throw StepBudgetExceeded("step budget of " + std::to_string(options_.step_budget) + " exhausted");
  }

  void trace(const Ref& r, bool write) {
    if (!options_.tracer) return;
    Access a;
    a.base = r.base;
    a.indices = r.indices;
    a.write = write;
    a.node = r.node;
    a.active = active_;
    a.iterations = iterations_;
    options_.tracer->on_access(a);
  }

  Value* lookup(const std::string& name) {
    for (auto it = locals_.rbegin(); it != locals_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    auto g = globals_.find(name);
    return g == globals_.end() ? nullptr : &g->second;
  }

  Env& innermost() { return locals_.empty() ? globals_ : locals_.back(); }

  Scalar load(const Ref& r) {
    trace(r, false);
    if (r.value->type == ElemType::Int) return Scalar::of(r.value->ints[r.flat]);
    return Scalar::of(r.value->floats[r.flat]);
  }

  Scalar store(const Ref& r, const Scalar& s) {
    Scalar c = convert(s, r.value->type);
    trace(r, true);
    if (r.value->type == ElemType::Int) r.value->ints[r.flat] = c.i;
    else r.value->floats[r.flat] = c.f;
    return c;
  }

  // Resolves an lvalue. Unknown scalars are created as globals when
  // `create_as` is given (assignment to an undeclared name).
  Ref lvalue(const Node& e, const Scalar* create_as = nullptr) {
    if (e.kind == NodeKind::Var) {
      Value* v = lookup(e.text);
      if (!v) {
        if (!create_as) throw UnboundVariable("'" + e.text + "' is not bound");
        v = &globals_[e.text];
        *v = create_as->is_int ? Value::of_int(0) : Value::of_float(0.0);
      }
      if (v->is_array()) throw EvalError("array '" + e.text + "' used as a scalar");
      return {v, 0, e.text, {}, e.id};
    }
    if (e.kind == NodeKind::Index) {
      const Node& base = e.children[0];
      if (base.kind != NodeKind::Var) throw EvalError("indexing a non-variable");
      std::vector<std::int64_t> idx;
      for (std::size_t k = 1; k < e.children.size(); ++k) {
        Scalar s = eval(e.children[k]);
        if (!s.is_int) throw EvalError("non-integer index into '" + base.text + "'");
        idx.push_back(s.i);
      }
      Value* v = lookup(base.text);
      if (!v) throw UnboundVariable("'" + base.text + "' is not bound");
      if (v->shape.size() != idx.size())
        throw EvalError("'" + base.text + "' indexed with " + std::to_string(idx.size()) + " subscripts");
      std::size_t flat = 0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0 || static_cast<std::size_t>(idx[k]) >= v->shape[k])
          throw OutOfBounds("index " + std::to_string(idx[k]) + " out of bounds for array '" + base.text +
                            "' of extent " + std::to_string(v->shape[k]));
        flat = flat * v->shape[k] + static_cast<std::size_t>(idx[k]);
      }
      return {v, flat, base.text, std::move(idx), e.id};
    }
    throw EvalError("expression is not assignable: " + print_expr(e));
  }

  Scalar eval(const Node& e) {
    Active act(*this, e);
    switch (e.kind) {
      case NodeKind::IntLit:
        return Scalar::of(static_cast<std::int64_t>(std::stoll(e.text)));
      case NodeKind::FloatLit:
        return Scalar::of(std::stod(e.text));
      case NodeKind::Var:
      case NodeKind::Index:
        return load(lvalue(e));
      case NodeKind::Assign: {
        Scalar rhs = eval(e.children[1]);
        return store(lvalue(e.children[0], &rhs), rhs);
      }
      case NodeKind::AugAssign: {
        Ref r = lvalue(e.children[0]);
        Scalar rhs = eval(e.children[1]);
        Scalar cur = load(r);
        return store(r, arith(e.text.substr(0, 1), cur, rhs));
      }
      case NodeKind::BinOp: {
        if (e.text == "&&" || e.text == "||") {
          bool lhs = eval(e.children[0]).truthy();
          if (e.text == "&&" && !lhs) return Scalar::of(std::int64_t{0});
          if (e.text == "||" && lhs) return Scalar::of(std::int64_t{1});
          return Scalar::of(std::int64_t{eval(e.children[1]).truthy()});
        }
        Scalar a = eval(e.children[0]);
        Scalar b = eval(e.children[1]);
        return arith(e.text, a, b);
      }
      case NodeKind::UnaryOp: {
        if (e.text == "++" || e.text == "--") {
          Ref r = lvalue(e.children[0]);
          Scalar old = load(r);
          Scalar now = arith(e.text == "++" ? "+" : "-", old, Scalar::of(std::int64_t{1}));
          now = store(r, now);
          return e.postfix ? old : now;
        }
        Scalar x = eval(e.children[0]);
        if (e.text == "-") return x.is_int ? Scalar::of(wrap_sub(0, x.i)) : Scalar::of(-x.f);
        if (e.text == "!") return Scalar::of(std::int64_t{!x.truthy()});
        throw EvalError("unsupported unary operator '" + e.text + "'");
      }
      case NodeKind::Call:
        return call(e);
      default:
        throw EvalError(std::string("cannot evaluate ") + std::string(kind_name(e.kind)));
    }
  }

  Scalar call(const Node& e) {
    std::vector<Scalar> args;
    for (const auto& a : e.children) args.push_back(eval(a));
    auto f = funcs_.find(e.text);
    if (f == funcs_.end()) return builtin(e.text, args);
    const Node& def = *f->second;
    std::size_t nparams = def.children.size() - 1;
    if (args.size() != nparams)
      throw EvalError("'" + e.text + "' expects " + std::to_string(nparams) + " arguments");
    std::vector<Env> saved = std::move(locals_);
    locals_.clear();
    locals_.emplace_back();
    for (std::size_t k = 0; k < nparams; ++k) {
      const Node& p = def.children[k];
      Scalar c = convert(args[k], elem_type(p.type));
      locals_.back()[p.text] = c.is_int ? Value::of_int(c.i) : Value::of_float(c.f);
    }
    Scalar result = Scalar::of(std::int64_t{0});
    try {
      exec(def.children.back());
    } catch (const ReturnSignal& r) {
      result = r.value;
    } catch (...) {
      locals_ = std::move(saved);
      throw;
    }
    locals_ = std::move(saved);
    if (def.type == "void") return Scalar::of(std::int64_t{0});
    return convert(result, elem_type(def.type));
  }

  static Scalar builtin(const std::string& name, const std::vector<Scalar>& args) {
    auto need = [&](std::size_t n) {
      if (args.size() != n) throw EvalError("'" + name + "' expects " + std::to_string(n) + " arguments");
    };
    if (name == "abs") {
      need(1);
      return args[0].is_int ? Scalar::of(args[0].i < 0 ? wrap_sub(0, args[0].i) : args[0].i)
                            : Scalar::of(std::fabs(args[0].f));
    }
    using Fn1 = double (*)(double);
    static const std::map<std::string, Fn1> unary = {
        {"sqrt", [](double x) { return std::sqrt(x); }}, {"fabs", [](double x) { return std::fabs(x); }},
        {"exp", [](double x) { return std::exp(x); }},   {"log", [](double x) { return std::log(x); }},
        {"sin", [](double x) { return std::sin(x); }},   {"cos", [](double x) { return std::cos(x); }},
        {"tan", [](double x) { return std::tan(x); }},   {"floor", [](double x) { return std::floor(x); }},
        {"ceil", [](double x) { return std::ceil(x); }}};
    if (auto u = unary.find(name); u != unary.end()) {
      need(1);
      return Scalar::of(u->second(args[0].as_double()));
    }
    if (name == "pow" || name == "fmin" || name == "fmax") {
      need(2);
      double x = args[0].as_double(), y = args[1].as_double();
      return Scalar::of(name == "pow" ? std::pow(x, y) : name == "fmin" ? std::fmin(x, y) : std::fmax(x, y));
    }
    throw EvalError("call to unknown function '" + name + "'");
  }

  void declare(const Node& decl) {
    ElemType t = elem_type(decl.text);
    bool global = locals_.empty();
    for (const auto& d : decl.children) {
      std::vector<std::size_t> shape;
      for (int k = 0; k < d.dims; ++k) {
        Scalar s = eval(d.children[k]);
        if (!s.is_int || s.i <= 0)
          throw EvalError("array '" + d.text + "' needs a positive integer extent");
        shape.push_back(static_cast<std::size_t>(s.i));
      }
      if (d.has_init()) {
        Scalar s = convert(eval(d.children.back()), t);
        Value v = s.is_int ? Value::of_int(s.i) : Value::of_float(s.f);
        innermost()[d.text] = std::move(v);
        trace({&innermost()[d.text], 0, d.text, {}, d.id}, true);
        continue;
      }
      if (global) {
        auto in = globals_.find(d.text);
        if (in != globals_.end()) {
          Value& v = in->second;
          if (v.shape != shape)
            throw EvalError("input '" + d.text + "' does not match its declared shape");
          if (v.type != t) {
            Value c = Value::zeros(t, shape);
            for (std::size_t k = 0; k < v.size(); ++k) {
              if (t == ElemType::Int) c.ints[k] = to_int(v.get(k));
              else c.floats[k] = v.get(k);
            }
            if (shape.empty()) c.shape.clear();
            v = std::move(c);
          }
          continue;
        }
      }
      innermost()[d.text] = Value::zeros(t, shape);
    }
  }

  void exec(const Node& s) {
    Active act(*this, s);
    tick();
    switch (s.kind) {
      case NodeKind::Decl:
        declare(s);
        return;
      case NodeKind::ExprStmt:
        eval(s.children[0]);
        return;
      case NodeKind::Block:
        locals_.emplace_back();
        try {
          for (const auto& c : s.children) exec(c);
        } catch (...) {
          locals_.pop_back();
          throw;
        }
        locals_.pop_back();
        return;
      case NodeKind::If:
        if (eval(s.children[0]).truthy()) exec(s.children[1]);
        else if (s.children.size() == 3) exec(s.children[2]);
        return;
      case NodeKind::While: {
        iterations_.emplace_back(s.id, 0);
        while (eval(s.children[0]).truthy()) {
          exec(s.children[1]);
          ++iterations_.back().second;
          tick();
        }
        iterations_.pop_back();
        return;
      }
      case NodeKind::For: {
        locals_.emplace_back();
        std::size_t depth = locals_.size();
        try {
          const Node& init = s.children[0];
          if (init.kind == NodeKind::Decl) declare(init);
          else eval(init);
          iterations_.emplace_back(s.id, 0);
          while (eval(s.children[1]).truthy()) {
            exec(s.children[3]);
            eval(s.children[2]);
            ++iterations_.back().second;
            tick();
          }
          iterations_.pop_back();
        } catch (...) {
          locals_.resize(depth - 1);
          if (!iterations_.empty() && iterations_.back().first == s.id) iterations_.pop_back();
          throw;
        }
        locals_.pop_back();
        return;
      }
      case NodeKind::Return:
        throw ReturnSignal{eval(s.children[0])};
      case NodeKind::FuncDef:
        throw EvalError("nested function definitions are not supported");
      default:
        throw EvalError(std::string("cannot execute ") + std::string(kind_name(s.kind)));
    }
  }

  Env globals_;
  std::vector<Env> locals_;
  std::map<std::string, const Node*> funcs_;
  const EvalOptions& options_;
  std::size_t steps_ = 0;
  std::vector<NodeId> active_;
  std::vector<std::pair<NodeId, std::int64_t>> iterations_;
};

}  // namespace

Env evaluate(const AnnotatedAst& ast, const Env& inputs, const EvalOptions& options) {
  Interpreter in(inputs, options);
  return in.run(ast.root());
}

bool env_close(const Env& expected, const Env& actual, double rel_tol, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  for (const auto& [name, x] : expected) {
    auto it = actual.find(name);
    if (it == actual.end()) return fail("missing variable '" + name + "'");
    const Value& y = it->second;
    if (x.shape != y.shape || x.size() != y.size()) return fail("shape mismatch for '" + name + "'");
    for (std::size_t k = 0; k < x.size(); ++k) {
      double a = x.get(k), b = y.get(k);
      if (std::isnan(a) && std::isnan(b)) continue;
      if (a == b) continue;
      double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
      if (!(std::fabs(a - b) <= rel_tol * scale))
        return fail("'" + name + "'[" + std::to_string(k) + "]: " + std::to_string(a) + " vs " + std::to_string(b));
    }
  }
  return true;
}

}  // namespace stml
