#include "stml/json_io.hpp"

#include "stml/error.hpp"
#include "stml/frontend.hpp"

namespace stml {

json to_json(const Warning& w) { return json::parse(w.json()); }

json to_json(const std::vector<Warning>& ws) {
  json out = json::array();
  for (const auto& w : ws) out.push_back(to_json(w));
  return out;
}

json binding_json(const Binding& b) {
  json out = json::object();
  for (const auto& [name, f] : b) {
    std::string text;
    for (const auto& n : f.nodes) {
      if (is_expression(n.kind)) {
        text += print_expr(n);
      } else if (f.kind == MetaKind::Expr) {
        // A declaration bound in a for header.
        std::string d = print_node(n);
        while (!d.empty() && (d.back() == '\n' || d.back() == ';')) d.pop_back();
        text += d;
      } else {
        text += print_node(n);
      }
    }
    out[name] = {{"kind", std::string(meta_kind_name(f.kind))}, {"code", text}};
  }
  return out;
}

json to_json(const StepRecord& r) {
  return {{"index", r.index},
          {"rule", r.match.rule},
          {"pos", r.match.pos},
          {"certainty", std::string(certainty_name(r.match.certainty))},
          {"overridden", r.overridden},
          {"before_hash", r.before_hash},
          {"after_hash", r.after_hash},
          {"old_code", r.old_code},
          {"new_code", r.new_code},
          {"diff", r.diff},
          {"next_rule", r.next_rule},
          {"warnings", to_json(r.warnings)}};
}

json match_json(const AnnotatedAst& ast, const Match& m, const std::string& id) {
  const Node* n = ast.find(m.pos);
  json j{{"id", id},
         {"rule", m.rule},
         {"pos", m.pos},
         {"line", n ? n->line : 0},
         {"certainty", std::string(certainty_name(m.certainty))},
         {"variant", m.variant},
         {"binding", binding_json(m.binding)}};
  return j;
}

json facts_json(const AnnotatedAst& ast) {
  json out = json::array();
  for (const auto& [id, props] : ast.properties()) {
    const Node* n = ast.find(id);
    for (const auto& p : props)
      out.push_back({{"node", id},
                     {"line", n ? n->line : 0},
                     {"pragma", p.pragma_line()},
                     {"provenance", std::string(provenance_name(p.provenance))}});
  }
  return out;
}

json derivation_report(const Derivation& d, const std::string& oracle, const AnnotatedAst& input) {
  json steps = json::array();
  for (const auto& s : d.steps) steps.push_back(to_json(s));
  return {{"status", d.status == DerivationStatus::Final ? "final" : "budget_exceeded"},
          {"oracle", oracle},
          {"input_hash", input.digest()},
          {"final_hash", d.result.digest()},
          {"steps", steps},
          {"warnings", to_json(d.warnings)}};
}

json error_json(const std::exception& e) {
  std::string kind = "InternalError";
  if (auto* se = dynamic_cast<const Error*>(&e)) kind = se->kind();
  return {{"error", {{"kind", kind}, {"message", e.what()}}}};
}

json candidate_json(const Candidate& c) {
  return {{"code", print_c(c.code)}, {"rules", c.rules}, {"rule", c.rule}, {"ordinal", c.ordinal}};
}

Candidate candidate_from_json(const json& j) {
  Candidate c;
  c.code = parse_c(j.at("code").get<std::string>());
  c.rules = j.value("rules", std::vector<std::string>{});
  c.rule = j.value("rule", std::string{});
  c.ordinal = j.value("ordinal", std::size_t{0});
  return c;
}

}  // namespace stml
