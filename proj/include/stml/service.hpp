#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "stml/json_io.hpp"

namespace httplib {
class Server;
}

namespace stml {

/// Parses, lowers skeleton annotations and merges a properties sidecar.
AnnotatedAst load_program(std::string_view source, std::string_view sidecar, std::vector<Warning>* warnings);

/// Wire id of the n-th match of `ast`.
std::string match_wire_id(const AnnotatedAst& ast, std::size_t n);

class Session {
 public:
  Session(std::string id, AnnotatedAst initial, RuleSet rules, std::vector<Warning> warnings);

  const std::string& id() const { return id_; }
  json state();
  json matches();
  json apply(const std::string& match_id, bool override_unknown);
  json undo();
  json history();
  json export_code();

 private:
  json state_locked();
  const std::vector<Match>& matches_locked();

  std::string id_;
  std::mutex mu_;
  History history_;
  RuleSet rules_;
  std::vector<Warning> warnings_;
  std::string matches_hash_;
  std::vector<Match> matches_;
  std::map<std::string, json> previews_;
};

struct Reply {
  int status = 200;
  json body;
};

/// The HTTP/JSON session service. `handle` is the transport-free entry point
/// used by the socket server and by tests.
class Service {
 public:
  explicit Service(RuleSet rules);
  ~Service();

  Reply handle(const std::string& method, const std::string& path, const std::string& body);

  /// Binds and serves until stop(). Returns false when the port is unavailable.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  Reply create_session(const json& body);
  Reply oracle_select(const json& body);
  Reply oracle_is_final(const json& body);
  std::shared_ptr<Session> find(const std::string& id);
  void install_routes();

  RuleSet rules_;
  Explorer explorer_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<int> next_id_{1};
  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<std::thread> thread_;
};

}  // namespace stml
