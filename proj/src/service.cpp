#include <httplib.h>

#include "stml/error.hpp"
#include "stml/frontend.hpp"
#include "stml/service.hpp"

namespace stml {

AnnotatedAst load_program(std::string_view source, std::string_view sidecar, std::vector<Warning>* warnings) {
  AnnotatedAst ast = lower_polca(parse_c(source), warnings);
  if (!sidecar.empty()) ast = ingest_properties(ast, sidecar, warnings);
  return ast;
}

std::string match_wire_id(const AnnotatedAst& ast, std::size_t n) { return ast.digest() + ":" + std::to_string(n); }

namespace {

struct HttpError {
  int status;
  json body;
};

[[noreturn]] void not_found(const std::string& what) {
  throw HttpError{404, {{"error", {{"kind", "NotFound"}, {"message", what}}}}};
}

int status_for(const Error& e) {
  const std::string& k = e.kind();
  if (k == "StaleMatch") return 409;
  return 400;
}

}  // namespace

// ---------------------------------------------------------------------------

Session::Session(std::string id, AnnotatedAst initial, RuleSet rules, std::vector<Warning> warnings)
    : id_(std::move(id)), history_(std::move(initial)), rules_(std::move(rules)), warnings_(std::move(warnings)) {}

const std::vector<Match>& Session::matches_locked() {
  const AnnotatedAst& cur = history_.current();
  if (matches_hash_ != cur.digest()) {
    matches_ = app_rules(cur, rules_);
    matches_hash_ = cur.digest();
    previews_.clear();
  }
  return matches_;
}

json Session::state_locked() {
  const AnnotatedAst& cur = history_.current();
  bool final = matches_locked().empty();
  return {{"id", id_},
          {"code", print_c(cur)},
          {"hash", cur.digest()},
          {"status", final ? "final" : "active"},
          {"facts", facts_json(cur)},
          {"steps", history_.records().size()},
          {"warnings", to_json(warnings_)}};
}

json Session::state() {
  std::lock_guard<std::mutex> lock(mu_);
  return state_locked();
}

json Session::matches() {
  std::lock_guard<std::mutex> lock(mu_);
  const AnnotatedAst& cur = history_.current();
  const auto& ms = matches_locked();
  json list = json::array();
  for (std::size_t i = 0; i < ms.size(); ++i) {
    std::string id = match_wire_id(cur, i);
    auto it = previews_.find(id);
    if (it == previews_.end()) {
      json j = match_json(cur, ms[i], id);
      try {
        TransResult r = trans(cur, ms[i], rules_, true);
        j["before"] = r.record.old_code;
        j["after"] = r.record.new_code;
        j["diff"] = r.record.diff;
      } catch (const Error& e) {
        j["before"] = "";
        j["after"] = "";
        j["diff"] = "";
        j["preview_error"] = error_json(e)["error"];
      }
      it = previews_.emplace(id, std::move(j)).first;
    }
    list.push_back(it->second);
  }
  return {{"hash", cur.digest()}, {"matches", list}};
}

json Session::apply(const std::string& match_id, bool override_unknown) {
  std::lock_guard<std::mutex> lock(mu_);
  const AnnotatedAst& cur = history_.current();
  auto colon = match_id.rfind(':');
  if (colon == std::string::npos) not_found("malformed match id '" + match_id + "'");
  std::string hash = match_id.substr(0, colon);
  if (hash != cur.digest())
    throw StaleMatch("match " + match_id + " belongs to code " + hash + ", current code is " + cur.digest());
  std::size_t n = 0;
  try {
    std::size_t used = 0;
    n = std::stoul(match_id.substr(colon + 1), &used);
    if (used != match_id.size() - colon - 1) not_found("malformed match id '" + match_id + "'");
  } catch (const std::logic_error&) {
    not_found("malformed match id '" + match_id + "'");
  }
  const auto& ms = matches_locked();
  if (n >= ms.size()) not_found("no match " + match_id);
  TransResult r = trans(cur, ms[n], rules_, override_unknown);
  for (const auto& w : r.record.warnings) warnings_.push_back(w);
  const StepRecord& rec = history_.push(std::move(r));
  json step = to_json(rec);
  return {{"step", step}, {"state", state_locked()}};
}

json Session::undo() {
  std::lock_guard<std::mutex> lock(mu_);
  history_.undo();
  return {{"state", state_locked()}};
}

json Session::history() {
  std::lock_guard<std::mutex> lock(mu_);
  json steps = json::array();
  for (const auto& r : history_.records()) steps.push_back(to_json(r));
  return {{"initial_hash", history_.initial().digest()}, {"steps", steps}};
}

json Session::export_code() {
  std::lock_guard<std::mutex> lock(mu_);
  const AnnotatedAst& cur = history_.current();
  json steps = json::array();
  for (const auto& r : history_.records()) steps.push_back(to_json(r));
  return {{"code", print_c(cur)},
          {"hash", cur.digest()},
          {"initial_hash", history_.initial().digest()},
          {"steps", steps},
          {"warnings", to_json(warnings_)}};
}

// ---------------------------------------------------------------------------

Service::Service(RuleSet rules) : rules_(std::move(rules)), explorer_(rules_) {}

Service::~Service() { stop(); }

std::shared_ptr<Session> Service::find(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) not_found("unknown session '" + id + "'");
  return it->second;
}

Reply Service::create_session(const json& body) {
  if (!body.contains("code") || !body["code"].is_string())
    throw HttpError{400, {{"error", {{"kind", "BadRequest"}, {"message", "'code' (string) is required"}}}}};
  RuleSet rules = rules_;
  if (body.contains("rules"))
    for (const auto& text : body["rules"]) rules.append(parse_rules(text.get<std::string>()));
  std::vector<Warning> warnings;
  AnnotatedAst ast = load_program(body["code"].get<std::string>(), body.value("properties", std::string{}), &warnings);
  std::string id = "s" + std::to_string(next_id_++);
  auto s = std::make_shared<Session>(id, std::move(ast), std::move(rules), std::move(warnings));
  {
    std::lock_guard<std::mutex> lock(mu_);
    sessions_[id] = s;
  }
  return {201, {{"id", id}, {"state", s->state()}}};
}

Reply Service::oracle_select(const json& body) {
  std::string spec = body.value("oracle", std::string("greedy"));
  if (spec.rfind("greedy", 0) != 0 && spec.rfind("lookahead", 0) != 0)
    throw OracleError("the service can only act as a greedy or lookahead oracle");
  auto oracle = make_oracle(spec, explorer_);
  std::vector<Candidate> cands;
  for (const auto& c : body.at("candidates")) cands.push_back(candidate_from_json(c));
  if (cands.empty()) throw NoViableCandidate("no candidates");
  OracleDecision d = oracle->select_rule(cands);
  return {200, {{"choice", d.choice}, {"next_rule", d.next_rule}}};
}

Reply Service::oracle_is_final(const json& body) {
  std::string spec = body.value("oracle", std::string("greedy"));
  if (spec.rfind("greedy", 0) != 0 && spec.rfind("lookahead", 0) != 0)
    throw OracleError("the service can only act as a greedy or lookahead oracle");
  auto oracle = make_oracle(spec, explorer_);
  return {200, {{"final", oracle->is_final(parse_c(body.at("code").get<std::string>()))}}};
}

Reply Service::handle(const std::string& method, const std::string& path, const std::string& body_text) {
  try {
    json body = json::object();
    if (!body_text.empty()) {
      try {
        body = json::parse(body_text);
      } catch (const json::exception& e) {
        return {400, {{"error", {{"kind", "BadRequest"}, {"message", std::string("invalid JSON: ") + e.what()}}}}};
      }
    }
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < path.size();) {
      std::size_t j = path.find('/', i);
      if (j == std::string::npos) j = path.size();
      if (j > i) parts.push_back(path.substr(i, j - i));
      i = j + 1;
    }
    auto is = [&](const char* m) { return method == m; };
    if (parts.size() == 1 && parts[0] == "health" && is("GET")) return {200, {{"status", "ok"}}};
    if (parts.size() == 1 && parts[0] == "rules" && is("GET")) return {200, {{"rules", rules_.names()}}};
    if (parts.size() == 1 && parts[0] == "session" && is("POST")) return create_session(body);
    if (parts.size() == 2 && parts[0] == "oracle" && is("POST")) {
      if (parts[1] == "select") return oracle_select(body);
      if (parts[1] == "is_final") return oracle_is_final(body);
    }
    if (parts.size() == 3 && parts[0] == "session") {
      auto s = find(parts[1]);
      const std::string& op = parts[2];
      if (op == "state" && is("GET")) return {200, s->state()};
      if (op == "matches" && is("GET")) return {200, s->matches()};
      if (op == "history" && is("GET")) return {200, s->history()};
      if (op == "apply" && is("POST")) {
        if (!body.contains("match_id") || !body["match_id"].is_string())
          return {400, {{"error", {{"kind", "BadRequest"}, {"message", "'match_id' (string) is required"}}}}};
        return {200, s->apply(body["match_id"].get<std::string>(), body.value("override", false))};
      }
      if (op == "undo" && is("POST")) return {200, s->undo()};
      if (op == "export" && is("POST")) return {200, s->export_code()};
    }
    return {404, {{"error", {{"kind", "NotFound"}, {"message", method + " " + path}}}}};
  } catch (const HttpError& e) {
    return {e.status, e.body};
  } catch (const Error& e) {
    return {status_for(e), error_json(e)};
  } catch (const json::exception& e) {
    return {400, {{"error", {{"kind", "BadRequest"}, {"message", e.what()}}}}};
  } catch (const std::exception& e) {
    return {500, error_json(e)};
  }
}

void Service::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    Reply r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  server_->Get(R"(/.*)", route);
  server_->Post(R"(/.*)", route);
  server_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
}

bool Service::listen(const std::string& host, int port) {
  install_routes();
  return server_->listen(host, port);
}

int Service::start_background(const std::string& host) {
  install_routes();
  int port = server_->bind_to_any_port(host);
  if (port <= 0) throw Error("ServiceError", "cannot bind " + host);
  thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_ && thread_->joinable()) thread_->join();
  thread_.reset();
}

}  // namespace stml
