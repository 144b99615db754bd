#pragma once

// Command-line front end. cli_main takes its output streams as arguments so
// tests can run it in process.
//
// Exit codes: 0 success, 1 diagnostics or computation failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "castcost/error.hpp"
#include "castcost/model_format.hpp"
#include "castcost/report.hpp"
#include "castcost/scenario.hpp"
#include "castcost/service.hpp"
#include "castcost/validate.hpp"

#ifndef CASTCOST_VERSION
#define CASTCOST_VERSION "0.0.0"
#endif

namespace castcost {

namespace detail {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// `name` as given if it exists, else looked up in the COST_MODEL_PATH
/// directories (colon separated), with and without a .cmdl suffix.
inline std::filesystem::path find_model_file(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::exists(name)) return name;
  if (const char* env = std::getenv("COST_MODEL_PATH")) {
    std::stringstream dirs(env);
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
      if (dir.empty()) continue;
      for (const std::string& candidate : {name, name + ".cmdl"}) {
        fs::path p = fs::path(dir) / candidate;
        if (fs::exists(p)) return p;
      }
    }
  }
  throw Error(ErrorCode::io_error, "model not found: " + name);
}

inline void print_diagnostics(std::ostream& os, const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    os << (d.severity == Severity::error ? "error" : "warning") << ' ' << d.location << ": "
       << d.message << '\n';
  }
}

/// Parsed and validated model; warnings go to `err`, errors throw.
inline ModelDocument load_model_file(const std::string& name, std::ostream& err) {
  auto path = find_model_file(name);
  ModelDocument doc = parse_model(read_file(path));
  auto diags = check_document(doc);
  print_diagnostics(err, diags);
  if (has_errors(diags)) throw Error(ErrorCode::invalid_model, "model has errors", path.string());
  return doc;
}

inline std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size() || !std::isfinite(v)) {
      throw UsageError("not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"Cost-entity models for sand-cast parts", "castcost"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("--verbose", verbose, "Print the version to stderr");

  std::string model, part_file, out_file, format = "json", series_arg, lever, values_arg,
                                       rates_arg, models_dir = ".", host = "127.0.0.1", cors;
  std::string scenario_file;
  std::vector<std::string> scenario_files;
  std::optional<double> target, budget;
  int port = 8080;

  auto* validate = app.add_subcommand("validate", "Check a model file");
  validate->add_option("model", model, "Model file or name on COST_MODEL_PATH")->required();

  auto* compute = app.add_subcommand("compute", "Per-part cost breakdown");
  compute->add_option("--model", model)->required();
  compute->add_option("--part", part_file, "Part spec JSON")->required();
  compute->add_option("--scenario", scenario_file, "Scenario JSON");
  compute->add_option("--series", series_arg, "QUANTITY:TOOLING");
  compute->add_option("--target", target, "Target cost per part");
  compute->add_option("--budget", budget, "Budget for the series (or one part)");
  compute->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  compute->add_option("--out", out_file, "Write here instead of stdout");

  auto* whatif_cmd = app.add_subcommand("whatif", "Delta trees of scenarios against the base");
  whatif_cmd->add_option("--model", model)->required();
  whatif_cmd->add_option("--part", part_file)->required();
  whatif_cmd->add_option("--scenario", scenario_files)->required();
  whatif_cmd->add_option("--out", out_file);

  auto* sweep_cmd = app.add_subcommand("sweep", "Totals over values of one lever");
  sweep_cmd->add_option("--model", model)->required();
  sweep_cmd->add_option("--part", part_file)->required();
  sweep_cmd->add_option("--lever", lever)->required();
  sweep_cmd->add_option("--values", values_arg, "v1,v2,...")->required();
  sweep_cmd->add_option("--target", target);
  sweep_cmd->add_option("--out", out_file);

  auto* bench = app.add_subcommand("bench", "Rank plants by total cost");
  bench->add_option("--model", model)->required();
  bench->add_option("--part", part_file)->required();
  bench->add_option("--rates", rates_arg, "R1.json,R2.json,...")->required();
  bench->add_option("--scenario", scenario_file, "Scenario JSON");
  bench->add_option("--out", out_file);

  auto* serve = app.add_subcommand("serve", "HTTP API over a models directory");
  serve->add_option("--port", port, "0 picks a free port")->check(CLI::Range(0, 65535));
  serve->add_option("--models", models_dir);
  serve->add_option("--host", host, "Bind address (default localhost)");
  serve->add_option("--cors", cors, "Allowed origin for browser clients");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (verbose) err << "castcost " << CASTCOST_VERSION << '\n';

  auto emit = [&](const std::string& text) {
    if (out_file.empty()) {
      out << text;
      return;
    }
    std::ofstream f(out_file, std::ios::binary);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + out_file);
    f << text;
  };

  try {
    if (*validate) {
      auto path = find_model_file(model);
      ModelDocument doc = parse_model(read_file(path));
      auto diags = check_document(doc);
      print_diagnostics(out, diags);
      if (has_errors(diags)) return 1;
      out << doc.model.id << ": ok\n";
      return 0;
    }
    if (*serve) {
      ModelRegistry registry;
      load_models(models_dir, registry);
      for (const auto& e : registry.load_errors) err << "not loaded " << e.file << ": " << e.message << '\n';
      CostService service(registry);
      httplib::Server server;
      service.install(server, cors.empty() ? std::nullopt : std::optional<std::string>(cors));
      if (port == 0) {
        port = server.bind_to_any_port(host);
        if (port < 0) throw Error(ErrorCode::io_error, "cannot bind " + host);
      } else if (!server.bind_to_port(host, port)) {
        throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
      }
      err << "serving " << registry.size() << " model(s) on http://" << host << ":" << port << '\n';
      err.flush();
      return server.listen_after_bind() ? 0 : 1;
    }

    ModelDocument doc = load_model_file(model, err);
    const CostModel& m = doc.model;
    PartSpec part = parse_part(read_file(part_file));
    std::vector<Scenario> scenarios;
    if (!scenario_file.empty()) scenario_files.push_back(scenario_file);
    for (const auto& f : scenario_files) scenarios.push_back(parse_scenario(read_file(f)));

    if (*compute) {
      ComputeRequest req;
      req.part = part;
      if (!scenarios.empty()) req.scenario = scenarios.front();
      if (!series_arg.empty()) {
        try {
          req.series = parse_series_arg(series_arg);
        } catch (const Error& e) {
          throw UsageError(e.message());
        }
      }
      req.target = target;
      req.budget = budget;
      ComputeReport r = compute_report(m, req);
      emit(format == "csv" ? report_csv(r) : report_json(r));
    } else if (*whatif_cmd) {
      emit(whatif_json(whatif(m, part, scenarios)));
    } else if (*sweep_cmd) {
      emit(sweep_json(m.id, lever, sweep(m, part, lever, parse_number_list(values_arg), target)));
    } else if (*bench) {
      std::vector<RateTable> tables;
      for (const auto& f : split_list(rates_arg)) tables.push_back(parse_rate_table(read_file(f)));
      auto result = benchmark_compare(m, part, tables, scenarios.empty() ? nullptr : &scenarios.front());
      emit(benchmark_json(m.id, result));
    }
    return 0;
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.describe() << '\n';
    return 1;
  }
}

}  // namespace castcost
