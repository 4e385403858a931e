#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stml/error.hpp"
#include "stml/frontend.hpp"
#include "stml/json_io.hpp"
#include "stml/service.hpp"

using namespace stml;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << text;
}

RuleSet load_rule_sets(const std::vector<std::string>& extra, bool with_defaults) {
  RuleSet rules;
  if (with_defaults) {
    std::string path = STML_DEFAULT_RULES;
    if (const char* dir = std::getenv("STML_RULE_PATH"); dir && *dir)
      path = (std::filesystem::path(dir) / "default.stml").string();
    rules = load_rules(path);
  }
  for (const auto& f : extra) rules.append(load_rules(f));
  return rules;
}

struct Common {
  std::vector<std::string> rules;
  bool no_defaults = false;
  std::string properties;
};

void add_rule_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--rules", c.rules, "Rule file appended after the defaults (repeatable)");
  cmd->add_flag("--no-default-rules", c.no_defaults, "Do not load the default rule library");
}

AnnotatedAst load_input(const std::string& input, const std::string& properties, std::vector<Warning>& warnings) {
  std::string sidecar = properties.empty() ? std::string{} : read_text(properties);
  return load_program(read_text(input), sidecar, &warnings);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-to-source transformation driver for annotated C"};
  app.require_subcommand(1);

  std::string input, out, report, oracle_spec = "greedy", host = "127.0.0.1";
  std::size_t budget = kDefaultBudget;
  int port = 8080;
  bool show_warnings = false;
  Common common;

  auto* transform = app.add_subcommand("transform", "Run a derivation and write the final code");
  transform->add_option("input", input, "C source")->required();
  add_rule_flags(transform, common);
  transform->add_option("--oracle", oracle_spec, "scripted:<file> | greedy | lookahead:<d> | http:<url>");
  transform->add_option("--budget", budget, "Maximum number of steps")->check(CLI::PositiveNumber);
  transform->add_option("--properties", common.properties, "Sidecar file with <file>:<line>: #pragma stml lines");
  transform->add_option("--out", out, "Output file (default: stdout)");
  transform->add_option("--report", report, "Derivation report (default: <out>.report.json when --out is set)");
  transform->add_flag("--warnings", show_warnings, "Print warnings to stderr, one JSON object per line");

  auto* lower = app.add_subcommand("lower", "Lower skeleton annotations and print the annotated code");
  lower->add_option("input", input, "C source")->required();
  lower->add_option("--out", out, "Output file (default: stdout)");
  lower->add_flag("--warnings", show_warnings, "Print warnings to stderr, one JSON object per line");

  auto* matches = app.add_subcommand("matches", "List applicable rules as JSON");
  matches->add_option("input", input, "C source")->required();
  add_rule_flags(matches, common);
  matches->add_option("--properties", common.properties, "Sidecar file");

  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON session service");
  add_rule_flags(serve, common);
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--host", host, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"kind", "UsageError"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }

  try {
    std::vector<Warning> warnings;
    auto emit_warnings = [&](const std::vector<Warning>& ws) {
      if (show_warnings)
        for (const auto& w : ws) std::cerr << w.json() << "\n";
    };

    if (*lower) {
      AnnotatedAst ast = lower_polca(parse_c(read_text(input)), &warnings);
      emit_warnings(warnings);
      if (out.empty())
        std::cout << print_c(ast);
      else
        write_text(out, print_c(ast));
      return 0;
    }

    RuleSet rules = load_rule_sets(common.rules, !common.no_defaults);

    if (*matches) {
      AnnotatedAst ast = load_input(input, common.properties, warnings);
      json list = json::array();
      auto ms = app_rules(ast, rules);
      for (std::size_t i = 0; i < ms.size(); ++i) list.push_back(match_json(ast, ms[i], match_wire_id(ast, i)));
      std::cout << list.dump(2) << "\n";
      return 0;
    }

    if (*serve) {
      Service service(std::move(rules));
      std::cerr << json{{"listening", host + ":" + std::to_string(port)}}.dump() << "\n";
      if (!service.listen(host, port)) throw Error("ServiceError", "cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    }

    AnnotatedAst ast = load_input(input, common.properties, warnings);
    Explorer explorer(rules);
    auto oracle = make_oracle(oracle_spec, explorer);
    Derivation d = run_derivation(ast, *oracle, explorer, budget);
    d.warnings.insert(d.warnings.begin(), warnings.begin(), warnings.end());
    emit_warnings(d.warnings);
    std::string code = print_c(d.result);
    if (out.empty())
      std::cout << code;
    else
      write_text(out, code);
    if (report.empty() && !out.empty()) report = out + ".report.json";
    if (!report.empty()) write_text(report, derivation_report(d, oracle->name(), ast).dump(2) + "\n");
    return d.status == DerivationStatus::Final ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << error_json(e).dump() << "\n";
    return 1;
  }
}
