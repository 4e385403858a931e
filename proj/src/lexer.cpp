#include "lexer.hpp"

#include <array>
#include <cctype>

#include "stml/error.hpp"

namespace stml::detail {

namespace {

constexpr std::array<std::string_view, 22> kPuncts = {
    "<<=", ">>=", "++", "--", "+=", "-=", "*=", "/=", "%=", "==", "!=",
    "<=",  ">=",  "&&", "||", "<<", ">>", "->", "::", "&=", "|=", "^="};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> lex(std::string_view src, int first_line) {
  std::vector<Token> out;
  int line = first_line;
  int col = 1;
  std::size_t i = 0;
  bool line_start = true;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
        line_start = true;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      int l0 = line, c0 = col;
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      if (i + 1 >= src.size()) throw SyntaxError(l0, c0, "unterminated comment");
      advance(2);
      continue;
    }
    if (c == '#') {
      if (!line_start) throw SyntaxError(line, col, "stray '#'");
      std::size_t end = src.find('\n', i);
      if (end == std::string_view::npos) end = src.size();
      std::string_view directive = src.substr(i + 1, end - i - 1);
      std::size_t p = directive.find_first_not_of(" \t");
      directive = p == std::string_view::npos ? std::string_view{} : directive.substr(p);
      if (directive.substr(0, 6) != "pragma" ||
          (directive.size() > 6 && !std::isspace(static_cast<unsigned char>(directive[6])))) {
        throw UnsupportedFeature("line " + std::to_string(line) +
                                 ": preprocessor directives other than #pragma are not supported");
      }
      std::string body(directive.substr(6));
      while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.pop_back();
      std::size_t q = body.find_first_not_of(" \t");
      body = q == std::string::npos ? std::string{} : body.substr(q);
      out.push_back({TokKind::Pragma, std::move(body), line, col});
      advance(end - i);
      continue;
    }
    line_start = false;
    Token t;
    t.line = line;
    t.col = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      t.kind = TokKind::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      bool is_float = false;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        is_float = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          is_float = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      if (j < src.size() && (src[j] == 'f' || src[j] == 'F')) {
        is_float = true;
        ++j;
      }
      if (j < src.size() && ident_char(src[j])) throw SyntaxError(line, col, "malformed number");
      t.kind = is_float ? TokKind::Float : TokKind::Int;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"' || c == '\'') throw UnsupportedFeature("line " + std::to_string(line) + ": string and character literals are not supported");
    t.kind = TokKind::Punct;
    for (auto p : kPuncts) {
      if (src.substr(i, p.size()) == p) {
        t.text = std::string(p);
        break;
      }
    }
    if (t.text.empty()) {
      static constexpr std::string_view singles = "+-*/%<>=!&|^~?:;,.(){}[]";
      if (singles.find(c) == std::string_view::npos)
        throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
      t.text = std::string(1, c);
    }
    advance(t.text.size());
    out.push_back(std::move(t));
  }
  out.push_back({TokKind::End, "", line, col});
  return out;
}

}  // namespace stml::detail
