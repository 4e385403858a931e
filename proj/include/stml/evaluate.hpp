#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stml/ast.hpp"

namespace stml {

enum class ElemType { Int, Float };

/// A scalar or a dense row-major 1-D/2-D array. Int storage wraps on
/// overflow; Float storage is IEEE double.
struct Value {
  ElemType type = ElemType::Float;
  std::vector<std::size_t> shape;  // empty for scalars
  std::vector<std::int64_t> ints;
  std::vector<double> floats;

  static Value of_int(std::int64_t v);
  static Value of_float(double v);
  static Value zeros(ElemType type, std::vector<std::size_t> shape);
  static Value array(std::vector<double> data);
  static Value int_array(std::vector<std::int64_t> data);

  bool is_array() const { return !shape.empty(); }
  std::size_t size() const { return type == ElemType::Int ? ints.size() : floats.size(); }
  double get(std::size_t k) const { return type == ElemType::Int ? static_cast<double>(ints[k]) : floats[k]; }
};

using Env = std::map<std::string, Value>;

/// One dynamic memory access observed by the interpreter.
struct Access {
  std::string base;
  std::vector<std::int64_t> indices;  // empty for scalars
  bool write = false;
  NodeId node = 0;                    // the Var/Index node performing the access
  std::vector<NodeId> active;         // ids of every node being evaluated, outermost first
  std::vector<std::pair<NodeId, std::int64_t>> iterations;  // (loop id, iteration ordinal)
};

class Tracer {
 public:
  virtual ~Tracer() = default;
  virtual void on_access(const Access& access) = 0;
};

struct EvalOptions {
  std::size_t step_budget = 1'000'000;
  Tracer* tracer = nullptr;
};

/// Runs the program. Inputs seed global variables (including free symbolic
/// sizes such as `N`); a top-level declaration without initializer takes
/// its input value when one is given. Returns every global variable.
Env evaluate(const AnnotatedAst& ast, const Env& inputs, const EvalOptions& options = {});

/// True when every variable of `expected` exists in `actual` with the same
/// shape and all elements agree within `rel_tol * max(1, |x|, |y|)`.
bool env_close(const Env& expected, const Env& actual, double rel_tol, std::string* why = nullptr);

}  // namespace stml
