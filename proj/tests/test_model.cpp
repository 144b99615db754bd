#include <gtest/gtest.h>

#include <cstring>

#include "castcost/castcost.hpp"
#include "support/checks.hpp"

using namespace castcost;

namespace {

Parameter lit(std::string name, double v) { return Parameter{std::move(name), v, ""}; }
Parameter expr(std::string name, std::string_view text) {
  return Parameter{std::move(name), parse_expr(text), ""};
}

CostModel scoped_model() {
  CostModel m;
  m.id = "scopes";
  m.processes = {{"p", {}}};
  m.materials = {{"m", {}}};
  Operation op;
  op.id = "f";
  op.process_id = "p";
  m.operations = {op};
  return m;
}

const ContextPath kCtx{"p", "m", "f"};

ErrorCode resolve_error(const CostModel& m, std::string_view name, const ContextPath& ctx,
                        const Overlays& overlays = {}) {
  try {
    resolve_parameter(m, name, ctx, overlays);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "resolved " << name;
  return ErrorCode::io_error;
}

}  // namespace

TEST(Resolve, GlobalOnly) {
  CostModel m = scoped_model();
  m.globals = {lit("x", 5)};
  EXPECT_EQ(resolve_parameter(m, "x", kCtx, {}), 5);
}

TEST(Resolve, ScenarioBeatsMaterialBeatsGlobal) {
  CostModel m = scoped_model();
  m.globals = {lit("x", 5)};
  m.materials[0].params = {lit("x", 7)};
  EXPECT_EQ(resolve_parameter(m, "x", kCtx, {}), 7);
  ParamMap scenario{{"x", 9}};
  ParamMap part;
  EXPECT_EQ(resolve_parameter(m, "x", kCtx, {&scenario, &part}), 9);
}

TEST(Resolve, AllNonEmptyScopeSubsets) {
  for (unsigned mask = 1; mask < 64; ++mask) {
    auto c = support::precedence_case(mask);
    double got = resolve_parameter(c.model, "x", c.ctx, part_overlays(c.part));
    EXPECT_EQ(got, support::expected_precedence_value(mask)) << "mask " << mask;
    // Same answer when the engine prices the operation consuming x.
    auto b = compute_part_cost(c.model, c.part);
    const auto& f = std::get<CostBreakdown>(b.children[0]);
    EXPECT_EQ(std::get<LineItem>(f.children[2]).amount, got) << "mask " << mask;
  }
}

TEST(Resolve, DerivedParameterSeesOverlays) {
  CostModel m = scoped_model();
  m.globals = {lit("a", 2), expr("b", "a * 10")};
  EXPECT_EQ(resolve_parameter(m, "b", kCtx, {}), 20);
  ParamMap part{{"a", 3}};
  EXPECT_EQ(resolve_parameter(m, "b", kCtx, {&part}), 30);
}

TEST(Resolve, DerivedParameterUsesTheCallersContext) {
  // The global formula picks up the material-scoped value of its input.
  CostModel m = scoped_model();
  m.globals = {expr("mass", "volume * density"), lit("volume", 2), lit("density", 1)};
  m.materials[0].params = {lit("density", 7.8)};
  EXPECT_DOUBLE_EQ(resolve_parameter(m, "mass", kCtx, {}), 15.6);
  EXPECT_EQ(resolve_parameter(m, "mass", ContextPath{"p", std::nullopt, std::nullopt}, {}), 2);
}

TEST(Resolve, Unresolved) {
  CostModel m = scoped_model();
  EXPECT_EQ(resolve_error(m, "nope", kCtx), ErrorCode::unresolved_parameter);
  try {
    resolve_parameter(m, "nope", kCtx, {});
  } catch (const Error& e) {
    EXPECT_NE(e.message().find("nope"), std::string::npos);
    EXPECT_NE(e.message().find("p/m/f"), std::string::npos);
  }
}

TEST(Resolve, Cycles) {
  CostModel m = scoped_model();
  m.globals = {expr("a", "b + 1"), expr("b", "a + 1"), expr("s", "s")};
  EXPECT_EQ(resolve_error(m, "a", kCtx), ErrorCode::cyclic_parameter);
  EXPECT_EQ(resolve_error(m, "s", kCtx), ErrorCode::cyclic_parameter);
  // An overlay breaks the cycle.
  ParamMap part{{"b", 1}};
  EXPECT_EQ(resolve_parameter(m, "a", kCtx, {&part}), 2);
}

TEST(Resolve, DepthLimit) {
  auto chain = [](int n) {
    CostModel m = scoped_model();
    for (int i = 0; i < n; ++i) m.globals.push_back(expr("p" + std::to_string(i), "p" + std::to_string(i + 1)));
    m.globals.push_back(lit("p" + std::to_string(n), 1));
    return m;
  };
  // Chains of 32 references resolve; 33 exceed the bound.
  EXPECT_EQ(resolve_parameter(chain(32), "p0", kCtx, {}), 1);
  EXPECT_EQ(resolve_error(chain(33), "p0", kCtx), ErrorCode::cyclic_parameter);
}

TEST(Resolve, UnknownContext) {
  CostModel m = scoped_model();
  m.globals = {lit("x", 1)};
  EXPECT_EQ(resolve_error(m, "x", {"zz", "m", std::nullopt}), ErrorCode::unknown_context);
  EXPECT_EQ(resolve_error(m, "x", {"p", "zz", std::nullopt}), ErrorCode::unknown_context);
  EXPECT_EQ(resolve_error(m, "x", {"p", std::nullopt, "f"}), ErrorCode::unknown_context);
  EXPECT_EQ(resolve_error(m, "x", {"p", "m", "zz"}), ErrorCode::unknown_context);
}

TEST(Resolve, ReferenceDensity) {
  auto bundle = build_reference_model();
  ContextPath ctx{"sand_casting", "ge240", std::nullopt};
  EXPECT_EQ(resolve_parameter(bundle.model, "density", ctx, part_overlays(bundle.part)), 7.8);
}

TEST(Resolve, Deterministic) {
  auto bundle = build_reference_model();
  ContextPath ctx{"melting", "ge240", "fusion"};
  double a = resolve_parameter(bundle.model, "poured_kg", ctx, part_overlays(bundle.part));
  double b = resolve_parameter(bundle.model, "poured_kg", ctx, part_overlays(bundle.part));
  EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
}

TEST(EntityCost, Examples) {
  CostModel m = scoped_model();
  m.globals = {lit("driver_qty", 4), lit("mass_kg", 2), lit("price_eur_kg", 3)};
  CostEntity zero{"z", "driver_qty", parse_expr("driver_qty * 0"), Category::consumable};
  CostEntity metal{"metal", "mass_kg", parse_expr("mass_kg * price_eur_kg"), Category::material};
  CostEntity unresolved{"u", "h", parse_expr("h * rate"), Category::labor};
  EXPECT_EQ(entity_cost(m, zero, kCtx, {}), 0);
  EXPECT_EQ(entity_cost(m, metal, kCtx, {}), 6);
  try {
    entity_cost(m, unresolved, kCtx, {});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unresolved_parameter);
  }
}

TEST(Categories, RoundTripNames) {
  for (Category c : kAllCategories) EXPECT_EQ(parse_category(to_string(c)), c);
  EXPECT_FALSE(parse_category("overhead"));
}
