#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stml::detail {

enum class TokKind { Ident, Int, Float, Punct, Pragma, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  int line = 1;
  int col = 1;
};

/// Splits C-subset source into tokens. `#pragma` lines become one Pragma
/// token holding the text after `#pragma`; other directives are rejected.
std::vector<Token> lex(std::string_view source, int first_line = 1);

}  // namespace stml::detail
