#include <httplib.h>

#include "stml/error.hpp"
#include "stml/frontend.hpp"
#include "stml/json_io.hpp"

namespace stml {

namespace {

json post(const std::string& base, const std::string& path, const json& body) {
  httplib::Client cli(base);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(3600);
  auto res = cli.Post(path, body.dump(), "application/json");
  if (!res) throw OracleError("oracle at " + base + " unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw OracleError("oracle at " + base + path + " answered " + std::to_string(res->status) + ": " + res->body);
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw OracleError("oracle at " + base + path + " sent invalid JSON: " + e.what());
  }
}

}  // namespace

HttpOracle::HttpOracle(std::string base_url) : base_(std::move(base_url)) {
  while (!base_.empty() && base_.back() == '/') base_.pop_back();
}

OracleDecision HttpOracle::select_rule(const std::vector<Candidate>& candidates) {
  json cands = json::array();
  for (const auto& c : candidates) cands.push_back(candidate_json(c));
  json r = post(base_, "/oracle/select", {{"candidates", cands}});
  try {
    return {r.at("choice").get<std::size_t>(), r.value("next_rule", std::string{})};
  } catch (const json::exception& e) {
    throw OracleError(std::string("malformed oracle decision: ") + e.what());
  }
}

bool HttpOracle::is_final(const AnnotatedAst& ast) {
  json r = post(base_, "/oracle/is_final", {{"code", print_c(ast)}});
  try {
    return r.at("final").get<bool>();
  } catch (const json::exception& e) {
    throw OracleError(std::string("malformed oracle answer: ") + e.what());
  }
}

}  // namespace stml
