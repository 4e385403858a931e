#pragma once

#include <string>
#include <string_view>

#include "stml/ast.hpp"

namespace stml {

/// Parses the supported C subset. Pragma lines (`#pragma polca|stml ...`)
/// attach, in source order, to the statement that follows them.
AnnotatedAst parse_c(std::string_view source);

/// Parses a single C expression (used for pragma arguments and tests).
Node parse_expression(std::string_view source);

/// Pretty-prints with every attached fact re-emitted as a pragma line
/// directly above its statement.
std::string print_c(const AnnotatedAst& ast);
std::string print_node(const Node& node, int indent = 0);
std::string print_expr(const Node& expr);

/// Line-oriented unified diff of the printed programs. Empty when equal.
std::string diff(const AnnotatedAst& before, const AnnotatedAst& after);
std::string unified_diff(std::string_view before, std::string_view after,
                         std::string_view from_label = "before",
                         std::string_view to_label = "after");

}  // namespace stml
