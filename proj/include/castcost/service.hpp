#pragma once

// HTTP facade over the engine. Routing and request handling live in
// CostService::handle so they can be exercised without a socket; install()
// binds them to a cpp-httplib server.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>

#include "castcost/error.hpp"
#include "castcost/model_format.hpp"
#include "castcost/reference.hpp"
#include "castcost/report.hpp"
#include "castcost/scenario.hpp"
#include "castcost/validate.hpp"

namespace castcost {

struct ModelSnapshot {
  std::shared_ptr<const ModelDocument> document;
  std::uint64_t version = 0;

  const CostModel& model() const { return document->model; }
};

struct LoadError {
  std::string file;
  std::string message;
};

/// Model id to the current document. Readers take a snapshot (shared pointer
/// plus version) and keep using it even if the model is replaced meanwhile.
class ModelRegistry {
 public:
  std::optional<ModelSnapshot> get(std::string_view id) const {
    std::shared_lock lock(mutex_);
    auto it = models_.find(id);
    if (it == models_.end()) return std::nullopt;
    return it->second;
  }

  /// Registers or replaces `doc` under its model id; returns the new version.
  std::uint64_t put(ModelDocument doc) {
    auto ptr = std::make_shared<const ModelDocument>(std::move(doc));
    std::unique_lock lock(mutex_);
    auto& slot = models_[ptr->model.id];
    slot.document = std::move(ptr);
    slot.version += 1;
    return slot.version;
  }

  /// (id, version) sorted by id.
  std::vector<std::pair<std::string, std::uint64_t>> list() const {
    std::shared_lock lock(mutex_);
    std::vector<std::pair<std::string, std::uint64_t>> out;
    for (const auto& [id, snap] : models_) out.emplace_back(id, snap.version);
    return out;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return models_.size();
  }

  std::vector<LoadError> load_errors;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, ModelSnapshot, std::less<>> models_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// First error-severity problem in a document, as one line.
inline std::optional<std::string> first_error(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::error) return d.location + ": " + d.message;
  }
  return std::nullopt;
}

/// Every *.cmdl file in `dir`, in file-name order. Files that fail to read,
/// parse or validate are recorded in load_errors and not registered; so is a
/// second file declaring an id already taken.
inline void load_models(const std::filesystem::path& dir, ModelRegistry& registry) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (std::filesystem::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->path().extension() == ".cmdl") files.push_back(it->path());
  }
  if (ec) {
    registry.load_errors.push_back({dir.string(), "cannot list directory: " + ec.message()});
    return;
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    try {
      ModelDocument doc = parse_model(read_file(f));
      if (auto err = first_error(check_document(doc))) {
        registry.load_errors.push_back({name, *err});
        continue;
      }
      if (registry.get(doc.model.id)) {
        registry.load_errors.push_back({name, "model id '" + doc.model.id + "' already loaded"});
        continue;
      }
      registry.put(std::move(doc));
    } catch (const Error& e) {
      registry.load_errors.push_back({name, e.describe()});
    }
  }
}

struct HttpResponse {
  int status = 200;
  std::string body;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return 400;
    case ErrorCode::unknown_model: return 404;
    case ErrorCode::io_error: return 500;
    default: return 422;
  }
}

inline ComputeRequest compute_request_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_input, "request body must be an object");
  ComputeRequest r;
  r.part = part_from_json(detail::member(j, "part", "body"));
  if (j.contains("scenario") && !j.at("scenario").is_null()) r.scenario = scenario_from_json(j.at("scenario"));
  if (j.contains("series") && !j.at("series").is_null()) r.series = series_from_json(j.at("series"));
  if (j.contains("target") && !j.at("target").is_null()) r.target = detail::get_number(j.at("target"), "target");
  if (j.contains("budget") && !j.at("budget").is_null()) r.budget = detail::get_number(j.at("budget"), "budget");
  return r;
}

inline std::string levers_json(const std::vector<Lever>& levers) {
  JsonWriter w;
  w.begin_array();
  for (const auto& l : levers) {
    w.begin_object();
    w.key("name").string(l.name);
    w.key("description").string(l.description);
    if (l.is_choice()) {
      w.key("choices").begin_array();
      for (const auto& c : l.choices) w.string(c);
      w.end_array();
    } else {
      w.key("min").number(l.min);
      w.key("max").number(l.max);
    }
    w.end_object();
  }
  w.end_array();
  return w.take();
}

class CostService {
 public:
  explicit CostService(ModelRegistry& registry) : registry_(registry) {}

  /// Routes one request. Never throws.
  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body) const {
    try {
      return route(method, path, body);
    } catch (const Error& e) {
      return {http_status(e.code()), error_json(e)};
    } catch (const std::exception& e) {
      return {500, error_json(Error(ErrorCode::io_error, std::string("internal error: ") + e.what()))};
    }
  }

  /// Binds the routes to `server`. With `cors_origin`, responses carry
  /// Access-Control-Allow-Origin and OPTIONS preflights are answered.
  void install(httplib::Server& server, std::optional<std::string> cors_origin = std::nullopt) const {
    auto dispatch = [this, cors_origin](const httplib::Request& req, httplib::Response& res) {
      HttpResponse r = handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
      if (cors_origin) res.set_header("Access-Control-Allow-Origin", *cors_origin);
    };
    const std::string pattern = R"(/api(/.*)?)";
    server.Get(pattern, dispatch);
    server.Post(pattern, dispatch);
    server.Put(pattern, dispatch);
    if (cors_origin) {
      server.Options(pattern, [cors_origin](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Origin", *cors_origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      });
    }
  }

 private:
  static std::vector<std::string> segments(std::string_view path) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size()) {
      if (path[i] == '/') {
        ++i;
        continue;
      }
      std::size_t j = path.find('/', i);
      if (j == std::string_view::npos) j = path.size();
      out.emplace_back(path.substr(i, j - i));
      i = j;
    }
    return out;
  }

  static HttpResponse not_found(std::string_view method, std::string_view path) {
    return {404, error_json(Error(ErrorCode::invalid_input,
                                  "no route for " + std::string(method) + " " + std::string(path)))};
  }

  static Json parse_body(std::string_view body) { return detail::parse_json_text(body, "request body"); }

  ModelSnapshot snapshot(const std::string& id) const {
    auto s = registry_.get(id);
    if (!s) throw Error(ErrorCode::unknown_model, "unknown model '" + id + "'");
    return *s;
  }

  HttpResponse route(std::string_view method, std::string_view path, std::string_view body) const {
    auto seg = segments(path);
    if (seg.size() < 2 || seg[0] != "api") return not_found(method, path);
    if (seg.size() == 2 && seg[1] == "health" && method == "GET") {
      return {200, "{\n  \"status\": \"ok\"\n}\n"};
    }
    if (seg[1] != "models") return not_found(method, path);
    if (seg.size() == 2 && method == "GET") return list_models();
    if (seg.size() == 3 && method == "PUT") return put_model(seg[2], body);
    if (seg.size() != 4) return not_found(method, path);
    const std::string& id = seg[2];
    const std::string& action = seg[3];
    if (action == "levers" && method == "GET") {
      return {200, levers_json(model_levers(snapshot(id).model()))};
    }
    if (method != "POST") return not_found(method, path);
    if (action == "compute") return compute(id, body);
    if (action == "whatif") return run_whatif(id, body);
    if (action == "sweep") return run_sweep(id, body);
    if (action == "bench") return run_bench(id, body);
    return not_found(method, path);
  }

  HttpResponse list_models() const {
    JsonWriter w;
    w.begin_array();
    for (const auto& [id, version] : registry_.list()) {
      w.begin_object();
      w.key("id").string(id);
      w.key("version").integer(static_cast<long long>(version));
      w.end_object();
    }
    w.end_array();
    return {200, w.take()};
  }

  HttpResponse put_model(const std::string& id, std::string_view body) const {
    ModelDocument doc;
    try {
      doc = parse_model(body);
    } catch (const SyntaxError& e) {
      Error err(ErrorCode::syntax_error, e.message(),
                std::to_string(e.line()) + ":" + std::to_string(e.column()));
      return {422, error_json(err)};
    }
    auto diags = check_document(doc);
    if (doc.model.id != id) {
      diags.insert(diags.begin(), {Severity::error, "model",
                                   "model id '" + doc.model.id + "' does not match '" + id + "'"});
    }
    JsonWriter w;
    w.begin_object();
    if (has_errors(diags)) {
      w.key("code").string("invalid_model");
      w.key("message").string("model has errors; not registered");
    } else {
      w.key("id").string(id);
      w.key("version").integer(static_cast<long long>(registry_.put(std::move(doc))));
    }
    w.key("diagnostics");
    write_diagnostics(w, diags);
    w.end_object();
    return {has_errors(diags) ? 422 : 200, w.take()};
  }

  HttpResponse compute(const std::string& id, std::string_view body) const {
    ModelSnapshot snap = snapshot(id);
    ComputeRequest req = compute_request_from_json(parse_body(body));
    return {200, report_json(compute_report(snap.model(), req))};
  }

  HttpResponse run_whatif(const std::string& id, std::string_view body) const {
    ModelSnapshot snap = snapshot(id);
    Json j = parse_body(body);
    PartSpec part = part_from_json(detail::member(j, "part", "body"));
    const Json& list = detail::member(j, "scenarios", "body");
    if (!list.is_array()) throw Error(ErrorCode::invalid_input, "scenarios must be an array", "scenarios");
    std::vector<Scenario> scenarios;
    for (const auto& s : list) scenarios.push_back(scenario_from_json(s));
    return {200, whatif_json(whatif(snap.model(), part, scenarios))};
  }

  HttpResponse run_sweep(const std::string& id, std::string_view body) const {
    ModelSnapshot snap = snapshot(id);
    Json j = parse_body(body);
    PartSpec part = part_from_json(detail::member(j, "part", "body"));
    const Json& lever = detail::member(j, "lever", "body");
    if (!lever.is_string()) throw Error(ErrorCode::invalid_input, "lever must be a string", "lever");
    const Json& list = detail::member(j, "values", "body");
    if (!list.is_array()) throw Error(ErrorCode::invalid_input, "values must be an array", "values");
    std::vector<double> values;
    for (const auto& v : list) values.push_back(detail::get_number(v, "values"));
    std::optional<double> target;
    if (j.contains("target") && !j.at("target").is_null()) target = detail::get_number(j.at("target"), "target");
    auto rows = sweep(snap.model(), part, lever.get<std::string>(), values, target);
    return {200, sweep_json(snap.model().id, lever.get<std::string>(), rows)};
  }

  HttpResponse run_bench(const std::string& id, std::string_view body) const {
    ModelSnapshot snap = snapshot(id);
    Json j = parse_body(body);
    PartSpec part = part_from_json(detail::member(j, "part", "body"));
    const Json& list = detail::member(j, "rates", "body");
    if (!list.is_array()) throw Error(ErrorCode::invalid_input, "rates must be an array", "rates");
    std::vector<RateTable> tables;
    for (const auto& t : list) tables.push_back(rate_table_from_json(t));
    std::optional<Scenario> scenario;
    if (j.contains("scenario") && !j.at("scenario").is_null()) scenario = scenario_from_json(j.at("scenario"));
    auto result = benchmark_compare(snap.model(), part, tables, scenario ? &*scenario : nullptr);
    return {200, benchmark_json(snap.model().id, result)};
  }

  ModelRegistry& registry_;
};

}  // namespace castcost
