#include <gtest/gtest.h>

#include <random>

#include "castcost/castcost.hpp"

using namespace castcost;

namespace {

Expr num(double v) { return Expr::number(v); }

Component purchased(std::string id, double unit = 1) {
  Component c;
  c.id = std::move(id);
  c.kind = ComponentKind::purchased;
  c.quantity_per_output = num(1);
  c.unit_cost = num(unit);
  c.material_yield = num(1);
  return c;
}

Component produced(std::string id, std::string sub) {
  Component c;
  c.id = std::move(id);
  c.kind = ComponentKind::produced;
  c.quantity_per_output = num(1);
  c.sub_assembly = std::move(sub);
  c.material_yield = num(1);
  return c;
}

Operation plain_op(std::string id, std::string process = "p") {
  Operation op;
  op.id = std::move(id);
  op.process_id = std::move(process);
  op.cycle_time_s = num(60);
  op.parts_per_cycle = num(1);
  op.machine_rate_per_h = num(60);
  op.labor_rate_per_h = num(30);
  op.crew_size = num(1);
  op.scrap_rate = num(0);
  op.consumable_cost_per_part = num(0);
  return op;
}

CostModel minimal() {
  CostModel m;
  m.id = "minimal";
  m.processes = {{"p", {}}};
  m.materials = {{"m", {}}};
  m.components = {purchased("sand")};
  m.operations = {plain_op("pour")};
  m.assemblies = {Assembly{"a", "", {"sand"}, {"pour"}, ""}};
  m.root_assembly = "a";
  return m;
}

std::vector<std::string> messages(const std::vector<Diagnostic>& d, Severity s = Severity::error) {
  std::vector<std::string> out;
  for (const auto& x : d) {
    if (x.severity == s) out.push_back(x.message);
  }
  return out;
}

bool has_message(const std::vector<Diagnostic>& d, std::string_view text) {
  for (const auto& x : d) {
    if (x.message.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Validate, MinimalModelIsClean) { EXPECT_TRUE(validate_model(minimal()).empty()); }

TEST(Validate, ReferenceModelIsClean) {
  auto bundle = build_reference_model();
  auto d = validate_model(bundle.model);
  EXPECT_TRUE(d.empty()) << (d.empty() ? "" : d.front().location + " " + d.front().message);
}

TEST(Validate, MissingSubAssembly) {
  CostModel m = minimal();
  m.components.push_back(produced("core", "x"));
  m.assemblies[0].components.push_back("core");
  auto d = validate_model(m);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].message, "unresolved id x");
  EXPECT_EQ(d[0].location, "component:core.sub_assembly");
}

TEST(Validate, TwoCycle) {
  CostModel m = minimal();
  m.components.push_back(produced("to_b", "B"));
  m.components.push_back(produced("to_a", "A"));
  m.assemblies.push_back(Assembly{"A", "", {"to_b"}, {}, ""});
  m.assemblies.push_back(Assembly{"B", "", {"to_a"}, {}, ""});
  m.assemblies[0].components.push_back("to_b");
  auto errs = messages(validate_model(m));
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0], "cycle A,B");
}

TEST(Validate, DiagnosticsAreOrderedByLocation) {
  CostModel m = minimal();
  m.components[0].material_yield = num(0);
  m.operations[0].scrap_rate = num(1);
  m.operations[0].parts_per_cycle = num(0.5);
  m.assemblies.push_back(Assembly{"empty", "", {}, {}, ""});
  auto d = validate_model(m);
  ASSERT_GE(d.size(), 4u);
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_LE(d[i - 1].location, d[i].location);
  EXPECT_TRUE(has_message(d, "material_yield must lie in (0, 1]"));
  EXPECT_TRUE(has_message(d, "scrap_rate must lie in [0, 1)"));
  EXPECT_TRUE(has_message(d, "parts_per_cycle must be >= 1"));
  EXPECT_TRUE(has_message(d, "neither components nor operations"));
  EXPECT_EQ(validate_model(m), d);
}

TEST(Validate, ComponentKindInvariants) {
  CostModel m = minimal();
  m.components[0].unit_cost.reset();
  EXPECT_TRUE(has_message(validate_model(m), "purchased component needs unit_cost"));
  m = minimal();
  m.components[0].sub_assembly = "a";
  EXPECT_TRUE(has_message(validate_model(m), "purchased component cannot have sub_assembly"));
  m = minimal();
  Component c = produced("self", "a");
  c.unit_cost = num(1);
  m.components.push_back(c);
  EXPECT_TRUE(has_message(validate_model(m), "produced component cannot have unit_cost"));
}

TEST(Validate, EntityDriver) {
  CostModel m = minimal();
  m.globals = {Parameter{"mass", 2.0, "kg"}, Parameter{"price", 3.0, "eur_per_kg"}};
  m.entities = {CostEntity{"metal", "volume", parse_expr("mass * price"), Category::material}};
  m.operations[0].entities = {"metal"};
  EXPECT_TRUE(has_message(validate_model(m), "driver 'volume' does not appear in the formula"));
  m.entities[0].driver = "mass";
  EXPECT_TRUE(validate_model(m).empty());
  m.entities[0].formula = parse_expr("-mass * price");
  auto d = validate_model(m);
  EXPECT_FALSE(has_errors(d));
  EXPECT_TRUE(has_message(d, "credit"));
}

TEST(Validate, UnitMixIsAWarning) {
  CostModel m = minimal();
  m.globals = {Parameter{"t", 5.0, "s"}, Parameter{"c", 1.0, "eur"}};
  m.operations[0].consumable_cost_per_part = parse_expr("t + c");
  auto d = validate_model(m);
  EXPECT_FALSE(has_errors(d));
  EXPECT_TRUE(has_message(d, "suspicious unit mix"));
}

TEST(Validate, UnresolvedAndPartialDefinitions) {
  CostModel m = minimal();
  m.operations[0].machine_rate_per_h = Expr::variable("rate");
  EXPECT_TRUE(has_message(validate_model(m), "unresolved parameter 'rate'"));
  // Defined for one of two materials: a part on the other would fail.
  m.materials = {{"m", {Parameter{"rate", 1.0, ""}}}, {"n", {}}};
  EXPECT_TRUE(has_message(validate_model(m), "not defined for every process/material"));
  m.materials[1].params = {Parameter{"rate", 2.0, ""}};
  EXPECT_TRUE(validate_model(m).empty());
  // Declared input: bound by the part spec.
  m = minimal();
  m.operations[0].machine_rate_per_h = Expr::variable("rate");
  m.inputs = {{"rate", "eur_per_h"}};
  EXPECT_TRUE(validate_model(m).empty());
}

TEST(Validate, CyclicParameters) {
  CostModel m = minimal();
  m.globals = {Parameter{"a", parse_expr("b"), ""}, Parameter{"b", parse_expr("a"), ""}};
  m.operations[0].consumable_cost_per_part = Expr::variable("a");
  EXPECT_TRUE(has_message(validate_model(m), "cyclic parameter reference"));
}

TEST(Validate, DuplicatesAndUnusedDeclarations) {
  CostModel m = minimal();
  m.components.push_back(purchased("sand"));
  m.operations.push_back(plain_op("spare"));
  auto d = validate_model(m);
  EXPECT_TRUE(has_message(d, "duplicate component id sand"));
  EXPECT_TRUE(has_message(d, "operation is not used by any assembly"));
}

TEST(Validate, RootChecks) {
  CostModel m = minimal();
  m.root_assembly = "nope";
  EXPECT_TRUE(has_message(validate_model(m), "unresolved id nope"));
  m.root_assembly.clear();
  EXPECT_TRUE(has_message(validate_model(m), "no root assembly"));
  m = minimal();
  m.assemblies.push_back(Assembly{"orphan", "", {"sand"}, {}, ""});
  auto d = validate_model(m);
  EXPECT_FALSE(has_errors(d));
  EXPECT_TRUE(has_message(d, "unreachable from root"));
}

// Every digraph on up to four assemblies, edges being produced components.
TEST(Validate, ExhaustiveDigraphsAgainstTransitiveClosure) {
  int cyclic_seen = 0;
  for (int n = 1; n <= 4; ++n) {
    const int edges = n * n;
    for (std::uint32_t mask = 0; mask < (1u << edges); ++mask) {
      CostModel m;
      m.id = "g";
      m.processes = {{"p", {}}};
      m.materials = {{"m", {}}};
      m.components = {purchased("base")};
      for (int i = 0; i < n; ++i) {
        m.assemblies.push_back(Assembly{"A" + std::to_string(i), "", {"base"}, {}, ""});
      }
      bool reach[4][4] = {};
      for (int e = 0; e < edges; ++e) {
        if (!(mask & (1u << e))) continue;
        int from = e / n, to = e % n;
        std::string id = "c" + std::to_string(from) + std::to_string(to);
        m.components.push_back(produced(id, "A" + std::to_string(to)));
        m.assemblies[from].components.push_back(id);
        reach[from][to] = true;
      }
      m.root_assembly = "A0";
      for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
        }
      }
      bool cyclic = false;
      for (int i = 0; i < n; ++i) cyclic = cyclic || reach[i][i];
      auto d = validate_model(m);
      bool flagged = false;
      for (const auto& x : d) {
        if (x.severity == Severity::error) {
          ASSERT_EQ(x.message.rfind("cycle ", 0), 0u) << x.message;
          flagged = true;
          // Every member of a reported cycle lies on a cycle.
          std::string ids = x.message.substr(6);
          for (int i = 0; i < n; ++i) {
            if (ids.find("A" + std::to_string(i)) != std::string::npos) {
              ASSERT_TRUE(reach[i][i]);
            }
          }
        }
      }
      ASSERT_EQ(flagged, cyclic) << "n=" << n << " mask=" << mask;
      cyclic_seen += cyclic;
    }
  }
  EXPECT_GT(cyclic_seen, 60000);
}

namespace {

// Random model over a small pool of names, scattered across every scope, with
// fields referring to names that may or may not be defined.
CostModel wild_model(std::mt19937_64& rng) {
  auto coin = [&](int n) { return static_cast<int>(rng() % n) == 0; };
  const int pool = 8;
  auto name = [&] { return "n" + std::to_string(rng() % pool); };
  auto value_expr = [&]() -> std::variant<double, Expr> {
    if (!coin(3)) return 0.1 + static_cast<double>(rng() % 10) / 10;
    return parse_expr(name() + (coin(2) ? " + " : " * ") + name());
  };
  auto fill = [&](Scope& s, int sparsity) {
    for (int i = 0; i < pool; ++i) {
      if (coin(sparsity)) s.push_back(Parameter{"n" + std::to_string(i), value_expr(), ""});
    }
  };
  auto field = [&](const char* shape) {
    std::string text = shape;
    std::size_t at;
    while ((at = text.find('$')) != std::string::npos) text.replace(at, 1, coin(5) ? "1" : name());
    return parse_expr(text);
  };
  CostModel m;
  m.id = "wild";
  // Dense globals so that a fair share of models validates.
  for (int i = 0; i < pool; ++i) {
    if (!coin(6)) m.globals.push_back(Parameter{"n" + std::to_string(i), value_expr(), ""});
  }
  for (int i = 0; i < pool; ++i) {
    if (coin(6)) m.inputs.push_back({"n" + std::to_string(i), ""});
  }
  m.processes = {{"p0", {}}, {"p1", {}}};
  m.materials = {{"m0", {}}, {"m1", {}}};
  for (auto& p : m.processes) fill(p.params, 4);
  for (auto& p : m.materials) fill(p.params, 4);
  m.entities = {CostEntity{"e", "n0", parse_expr("n0 * " + name()), Category::tooling}};
  const int nops = 1 + static_cast<int>(rng() % 3);
  for (int k = 0; k < nops; ++k) {
    Operation op;
    op.id = "o" + std::to_string(k);
    op.process_id = coin(2) ? "p0" : "p1";
    if (coin(3)) op.material_id = coin(2) ? "m0" : "m1";
    fill(op.params, 4);
    op.cycle_time_s = field("$ * 10");
    op.parts_per_cycle = field("1 + $");
    op.machine_rate_per_h = field("$");
    op.labor_rate_per_h = field("$");
    op.crew_size = field("$");
    op.scrap_rate = field("min($, 0.5)");
    op.consumable_cost_per_part = field("$");
    if (coin(2)) op.entities = {"e"};
    m.operations.push_back(op);
  }
  Component c;
  c.id = "c";
  c.kind = ComponentKind::purchased;
  c.quantity_per_output = field("$");
  c.unit_cost = field("$ + $");
  c.material_yield = field("1 / (1 + $)");
  m.components = {c};
  Assembly a{"a", "", {"c"}, {}, ""};
  for (const auto& op : m.operations) a.operations.push_back(op.id);
  m.assemblies = {a};
  m.root_assembly = "a";
  return m;
}

}  // namespace

TEST(Validate, SoundnessUnderFuzzedPartSpecs) {
  std::mt19937_64 rng(2024);
  int clean = 0, rejected = 0;
  for (int i = 0; i < 4000; ++i) {
    CostModel m = wild_model(rng);
    if (has_errors(validate_model(m))) {
      ++rejected;
      continue;
    }
    ++clean;
    for (const char* p : {"p0", "p1"}) {
      for (const char* mat : {"m0", "m1"}) {
        PartSpec part{p, mat, {}, {}};
        for (const auto& in : m.inputs) part.params[in.name] = 0.1 + static_cast<double>(rng() % 50) / 10;
        try {
          compute_part_cost(m, part);
        } catch (const Error& e) {
          ASSERT_NE(e.code(), ErrorCode::unresolved_parameter) << e.describe() << "\n" << print_model(m);
          ASSERT_NE(e.code(), ErrorCode::cyclic_parameter) << e.describe() << "\n" << print_model(m);
        }
      }
    }
  }
  EXPECT_GT(clean, 200);
  EXPECT_GT(rejected, 200);
}
