#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "castcost/castcost.hpp"

using namespace castcost;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string source_file(const std::string& rel) { return read_file(std::string(CASTCOST_SOURCE_DIR) + "/" + rel); }

json reference_part_json() { return json::parse(source_file("models/reference_part.json")); }

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("castcost_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name, std::ios::binary) << text;
  }
};

struct Fixture {
  ModelRegistry registry;
  CostService service{registry};
  Fixture() { registry.put(parse_model(kReferenceModelText)); }
};

json body_of(const HttpResponse& r) { return json::parse(r.body); }

}  // namespace

TEST(Service, HealthAndModels) {
  Fixture f;
  auto h = f.service.handle("GET", "/api/health", "");
  EXPECT_EQ(h.status, 200);
  EXPECT_EQ(body_of(h).at("status"), "ok");
  auto list = body_of(f.service.handle("GET", "/api/models", ""));
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0].at("id"), "foundry_reference");
  EXPECT_EQ(list[0].at("version"), 1);
}

TEST(Service, UnknownRoutesAndModels) {
  Fixture f;
  for (auto [method, path] : std::vector<std::pair<const char*, const char*>>{
           {"GET", "/"}, {"GET", "/api"}, {"GET", "/api/nothing"}, {"DELETE", "/api/models"},
           {"GET", "/api/models/foundry_reference/compute"}, {"POST", "/api/models/foundry_reference/fly"}}) {
    auto r = f.service.handle(method, path, "");
    EXPECT_EQ(r.status, 404) << method << " " << path;
    EXPECT_EQ(body_of(r).at("code"), "invalid_input");
  }
  auto r = f.service.handle("POST", "/api/models/nope/compute", "{}");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(body_of(r).at("code"), "unknown_model");
}

TEST(Service, LeversListsReferenceLevers) {
  Fixture f;
  auto r = f.service.handle("GET", "/api/models/foundry_reference/levers", "");
  ASSERT_EQ(r.status, 200);
  auto j = body_of(r);
  EXPECT_EQ(j.size(), reference_levers().size());
  bool choice = false;
  for (const auto& l : j) choice = choice || l.contains("choices");
  EXPECT_TRUE(choice);
}

TEST(Service, ComputeMatchesLibrary) {
  Fixture f;
  auto bundle = build_reference_model();
  json req{{"part", reference_part_json()}, {"target", 61.5}, {"series", {{"quantity", 2000}, {"tooling_cost", 18000}}}};
  auto r = f.service.handle("POST", "/api/models/foundry_reference/compute", req.dump());
  ASSERT_EQ(r.status, 200) << r.body;
  ComputeRequest lib;
  lib.part = bundle.part;
  lib.target = 61.5;
  lib.series = SeriesSpec{2000, 18000};
  EXPECT_EQ(r.body, report_json(compute_report(bundle.model, lib)));
}

TEST(Service, ComputeErrors) {
  Fixture f;
  const std::string path = "/api/models/foundry_reference/compute";
  auto bad_json = f.service.handle("POST", path, "{");
  EXPECT_EQ(bad_json.status, 400);
  EXPECT_EQ(body_of(bad_json).at("code"), "invalid_input");
  EXPECT_EQ(f.service.handle("POST", path, "[]").status, 400);
  EXPECT_EQ(f.service.handle("POST", path, R"({"nopart": 1})").status, 400);

  json part = reference_part_json();
  part["params"].erase("n_cores");
  auto missing = f.service.handle("POST", path, json{{"part", part}}.dump());
  EXPECT_EQ(missing.status, 422);
  EXPECT_EQ(body_of(missing).at("code"), "missing_input");

  json req{{"part", reference_part_json()}, {"target", 0}};
  auto target = f.service.handle("POST", path, req.dump());
  EXPECT_EQ(target.status, 422);
  EXPECT_EQ(body_of(target).at("code"), "non_positive_target");

  json scen{{"part", reference_part_json()}, {"scenario", {{"id", "s"}, {"overrides", {{"typo", 1}}}}}};
  auto unknown = f.service.handle("POST", path, scen.dump());
  EXPECT_EQ(unknown.status, 422);
  EXPECT_EQ(body_of(unknown).at("code"), "unknown_override");
}

TEST(Service, WhatIfSweepBench) {
  Fixture f;
  auto bundle = build_reference_model();
  json part = reference_part_json();

  json w{{"part", part}, {"scenarios", json::array({{{"id", "a"}, {"overrides", {{"n_cores", 3}}}}})}};
  auto wr = f.service.handle("POST", "/api/models/foundry_reference/whatif", w.dump());
  ASSERT_EQ(wr.status, 200) << wr.body;
  Scenario s;
  s.id = "a";
  s.overrides["n_cores"] = 3;
  EXPECT_EQ(wr.body, whatif_json(whatif(bundle.model, bundle.part, {s})));

  json sw{{"part", part}, {"lever", "parts_per_mold"}, {"values", {1, 2, 4}}, {"target", 60}};
  auto sr = f.service.handle("POST", "/api/models/foundry_reference/sweep", sw.dump());
  ASSERT_EQ(sr.status, 200) << sr.body;
  EXPECT_EQ(sr.body, sweep_json("foundry_reference", "parts_per_mold",
                                sweep(bundle.model, bundle.part, "parts_per_mold", {1, 2, 4}, 60.0)));
  EXPECT_EQ(f.service.handle("POST", "/api/models/foundry_reference/sweep",
                             json{{"part", part}, {"lever", 3}, {"values", {1}}}.dump())
                .status,
            400);

  json b{{"part", part},
         {"rates", json::array({{{"plant_id", "x"}, {"overrides", {{"labor_rate_per_h", 50}}}},
                                {{"plant_id", "y"}, {"overrides", {{"labor_rate_per_h", 30}}}}})}};
  auto br = f.service.handle("POST", "/api/models/foundry_reference/bench", b.dump());
  ASSERT_EQ(br.status, 200) << br.body;
  auto bj = body_of(br);
  EXPECT_EQ(bj.at("plants")[0].at("plant_id"), "y");
  EXPECT_EQ(f.service.handle("POST", "/api/models/foundry_reference/bench",
                             json{{"part", part}, {"rates", json::array()}}.dump())
                .status,
            400);
}

TEST(Service, PutModel) {
  Fixture f;
  std::string text(kReferenceModelText);
  auto ok = f.service.handle("PUT", "/api/models/foundry_reference", text);
  ASSERT_EQ(ok.status, 200) << ok.body;
  EXPECT_EQ(body_of(ok).at("version"), 2);

  auto mismatch = f.service.handle("PUT", "/api/models/other", text);
  EXPECT_EQ(mismatch.status, 422);
  EXPECT_EQ(body_of(mismatch).at("diagnostics")[0].at("location"), "model");
  EXPECT_FALSE(f.registry.get("other"));

  auto syntax = f.service.handle("PUT", "/api/models/foundry_reference", "model \"x\" {");
  EXPECT_EQ(syntax.status, 422);
  EXPECT_EQ(body_of(syntax).at("code"), "syntax_error");

  std::string broken = text;
  broken.replace(broken.find("root = piece_brute;"), 19, "root = nowhere;");
  auto invalid = f.service.handle("PUT", "/api/models/foundry_reference", broken);
  EXPECT_EQ(invalid.status, 422);
  EXPECT_EQ(body_of(invalid).at("code"), "invalid_model");
  EXPECT_EQ(f.registry.get("foundry_reference")->version, 2u);
}

TEST(Service, SnapshotSurvivesReplacement) {
  Fixture f;
  auto snap = *f.registry.get("foundry_reference");
  f.registry.put(parse_model(kReferenceModelText));
  EXPECT_EQ(snap.version, 1u);
  EXPECT_EQ(snap.model().id, "foundry_reference");
  EXPECT_EQ(f.registry.get("foundry_reference")->version, 2u);
}

TEST(Service, LoadModelsSkipsBadFiles) {
  TempDir dir;
  dir.write("a_broken.cmdl", "model \"broken\" {");
  dir.write("b_reference.cmdl", std::string(kReferenceModelText));
  dir.write("c_again.cmdl", std::string(kReferenceModelText));
  dir.write("notes.txt", "ignored");
  ModelRegistry registry;
  load_models(dir.path, registry);
  EXPECT_EQ(registry.size(), 1u);
  ASSERT_EQ(registry.load_errors.size(), 2u);
  EXPECT_EQ(registry.load_errors[0].file, "a_broken.cmdl");
  EXPECT_EQ(registry.load_errors[1].file, "c_again.cmdl");

  TempDir empty;
  ModelRegistry none;
  load_models(empty.path, none);
  EXPECT_EQ(none.size(), 0u);
  EXPECT_TRUE(none.load_errors.empty());

  ModelRegistry missing;
  load_models(empty.path / "nope", missing);
  EXPECT_EQ(missing.load_errors.size(), 1u);
}

TEST(Service, StatusMapping) {
  EXPECT_EQ(http_status(ErrorCode::invalid_input), 400);
  EXPECT_EQ(http_status(ErrorCode::unknown_model), 404);
  EXPECT_EQ(http_status(ErrorCode::io_error), 500);
  EXPECT_EQ(http_status(ErrorCode::scrap_rate_out_of_range), 422);
}

TEST(Service, ConcurrentComputesMatchSerial) {
  Fixture f;
  const std::string path = "/api/models/foundry_reference/compute";
  std::vector<std::string> bodies, expected;
  for (int i = 0; i < 16; ++i) {
    json part = reference_part_json();
    part["params"]["n_cores"] = i % 5;
    part["params"]["parts_per_mold"] = 1 + i % 4;
    bodies.push_back(json{{"part", part}}.dump());
    expected.push_back(f.service.handle("POST", path, bodies.back()).body);
  }
  std::vector<std::string> got(bodies.size());
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < bodies.size(); i += 4) got[i] = f.service.handle("POST", path, bodies[i]).body;
      // Writers interleave with readers.
      f.registry.put(parse_model(kReferenceModelText));
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(got, expected);
  EXPECT_EQ(f.registry.get("foundry_reference")->version, 5u);
}

TEST(Service, RealServerRoundTrip) {
  Fixture f;
  httplib::Server server;
  f.service.install(server, std::string("http://localhost:5173"));
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/api/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");

  json req{{"part", reference_part_json()}};
  auto r = client.Post("/api/models/foundry_reference/compute", req.dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, f.service.handle("POST", "/api/models/foundry_reference/compute", req.dump()).body);

  auto missing = client.Get("/api/models/none/levers");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  auto pre = client.Options("/api/models/foundry_reference/compute");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_NE(pre->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);

  server.stop();
  th.join();
}
