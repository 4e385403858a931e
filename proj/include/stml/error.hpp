#pragma once

#include <stdexcept>
#include <string>

namespace stml {

/// Base of every error the library raises. `kind()` is the stable,
/// machine-readable error name used in JSON error objects and HTTP bodies.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, const std::string& message)
      : Error("SyntaxError", std::to_string(line) + ":" + std::to_string(col) + ": " + message),
        line_(line),
        col_(col) {}
  int line() const noexcept { return line_; }
  int col() const noexcept { return col_; }

 private:
  int line_;
  int col_;
};

#define STML_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

STML_DEFINE_ERROR(PragmaError)
STML_DEFINE_ERROR(UnsupportedFeature)
STML_DEFINE_ERROR(OutOfBounds)
STML_DEFINE_ERROR(StepBudgetExceeded)
STML_DEFINE_ERROR(UnboundVariable)
STML_DEFINE_ERROR(EvalError)
STML_DEFINE_ERROR(RuleSyntaxError)
STML_DEFINE_ERROR(UnboundMetavariable)
STML_DEFINE_ERROR(InstantiationError)
STML_DEFINE_ERROR(LoweringError)
STML_DEFINE_ERROR(PredicateArityError)
STML_DEFINE_ERROR(AnchorError)
STML_DEFINE_ERROR(StaleMatch)
STML_DEFINE_ERROR(UnsafeApplication)
STML_DEFINE_ERROR(EmptyHistory)
STML_DEFINE_ERROR(NoViableCandidate)
STML_DEFINE_ERROR(FileError)
STML_DEFINE_ERROR(OracleError)

#undef STML_DEFINE_ERROR

}  // namespace stml
