#include <sstream>

#include "parser.hpp"
#include "stml/error.hpp"
#include "stml/frontend.hpp"

namespace stml {

AnnotatedAst parse_c(std::string_view source) {
  detail::Parser p(detail::lex(source), false);
  return AnnotatedAst(p.translation_unit());
}

Node parse_expression(std::string_view source) {
  detail::Parser p(detail::lex(source), false);
  Node e = p.expression();
  if (!p.at_end()) p.fail("trailing input after expression");
  return e;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

struct Edit {
  char op;  // ' ', '-', '+'
  std::size_t a;  // line index in before (for ' ' and '-')
  std::size_t b;  // line index in after (for ' ' and '+')
};

std::string range(std::size_t start, std::size_t len) {
  // Unified-diff convention: an empty range names the line before it.
  std::size_t first = len == 0 ? start : start + 1;
  if (len == 1) return std::to_string(first);
  return std::to_string(first) + "," + std::to_string(len);
}

}  // namespace

std::string unified_diff(std::string_view before, std::string_view after, std::string_view from_label,
                         std::string_view to_label) {
  if (before == after) return {};
  auto a = split_lines(before);
  auto b = split_lines(after);
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);

  std::vector<Edit> edits;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      edits.push_back({' ', i++, j++});
    } else if (j < m && (i == n || lcs[i][j + 1] > lcs[i + 1][j])) {
      edits.push_back({'+', i, j++});
    } else {
      edits.push_back({'-', i++, j});
    }
  }

  constexpr std::size_t kContext = 3;
  std::ostringstream os;
  os << "--- " << from_label << "\n+++ " << to_label << "\n";
  std::size_t k = 0;
  while (k < edits.size()) {
    if (edits[k].op == ' ') {
      ++k;
      continue;
    }
    std::size_t start = k >= kContext ? k - kContext : 0;
    while (start < k && edits[start].op != ' ') ++start;
    std::size_t end = k;
    // Extend the hunk while changes are within 2*context of each other.
    for (;;) {
      while (end < edits.size() && edits[end].op != ' ') ++end;
      std::size_t next = end;
      while (next < edits.size() && edits[next].op == ' ' && next - end < 2 * kContext) ++next;
      if (next < edits.size() && edits[next].op != ' ') {
        end = next;
        continue;
      }
      break;
    }
    std::size_t stop = std::min(edits.size(), end + kContext);
    std::size_t a_start = edits[start].a, b_start = edits[start].b, a_len = 0, b_len = 0;
    for (std::size_t x = start; x < stop; ++x) {
      if (edits[x].op != '+') ++a_len;
      if (edits[x].op != '-') ++b_len;
    }
    os << "@@ -" << range(a_start, a_len) << " +" << range(b_start, b_len) << " @@\n";
    for (std::size_t x = start; x < stop; ++x) {
      const auto& e = edits[x];
      os << e.op << (e.op == '+' ? b[e.b] : a[e.a]) << '\n';
    }
    k = stop;
  }
  return os.str();
}

std::string diff(const AnnotatedAst& before, const AnnotatedAst& after) {
  return unified_diff(print_c(before), print_c(after));
}

}  // namespace stml
