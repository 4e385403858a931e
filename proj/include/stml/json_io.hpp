#pragma once

#include <exception>
#include <json.hpp>
#include <string>
#include <vector>

#include "stml/engine.hpp"
#include "stml/oracles.hpp"

namespace stml {

using json = nlohmann::json;

json to_json(const Warning& w);
json to_json(const std::vector<Warning>& ws);
json to_json(const StepRecord& r);
json binding_json(const Binding& b);
/// `id` is the wire identifier (`<hash>:<ordinal>`).
json match_json(const AnnotatedAst& ast, const Match& m, const std::string& id);
/// Every fact of the program with its node, line and provenance.
json facts_json(const AnnotatedAst& ast);
json derivation_report(const Derivation& d, const std::string& oracle, const AnnotatedAst& input);
json error_json(const std::exception& e);

json candidate_json(const Candidate& c);
Candidate candidate_from_json(const json& j);

}  // namespace stml
