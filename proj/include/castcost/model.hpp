#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "castcost/expr.hpp"

namespace castcost {

/// A named value inside one scope. Literal values carry a free-form unit label
/// ("eur_per_h", "s", "kg"); units are labels only and are never converted.
struct Parameter {
  std::string name;
  std::variant<double, Expr> value;
  std::string unit;

  bool is_literal() const { return std::holds_alternative<double>(value); }

  friend bool operator==(const Parameter&, const Parameter&) = default;
};

using Scope = std::vector<Parameter>;

inline const Parameter* find_parameter(const Scope& scope, std::string_view name) {
  for (const auto& p : scope) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

/// Node of the context tree: process, then material, then feature (operation).
struct ContextPath {
  std::string process_id;
  std::optional<std::string> material_id;
  std::optional<std::string> feature_id;

  friend bool operator==(const ContextPath&, const ContextPath&) = default;
};

enum class Category { material, labor, machine, consumable, scrap, tooling };

inline constexpr Category kAllCategories[] = {Category::material, Category::labor,
                                              Category::machine,  Category::consumable,
                                              Category::scrap,    Category::tooling};

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::material: return "material";
    case Category::labor: return "labor";
    case Category::machine: return "machine";
    case Category::consumable: return "consumable";
    case Category::scrap: return "scrap";
    case Category::tooling: return "tooling";
  }
  return "?";
}

inline std::optional<Category> parse_category(std::string_view s) {
  for (Category c : kAllCategories) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

/// Cost entity: costs of homogeneous resources consumed by one activity,
/// scaled by exactly one driver parameter that must appear in the formula.
struct CostEntity {
  std::string id;
  std::string driver;
  std::optional<Expr> formula;
  Category category = Category::consumable;

  friend bool operator==(const CostEntity&, const CostEntity&) = default;
};

enum class ComponentKind { purchased, produced };

struct Component {
  std::string id;
  std::string name;
  ComponentKind kind = ComponentKind::purchased;
  std::optional<Expr> quantity_per_output;
  std::optional<Expr> unit_cost;
  std::optional<std::string> sub_assembly;
  std::optional<Expr> material_yield;
  /// Attached entity; only its category is used, replacing the default
  /// `material` category of the line item.
  std::optional<std::string> entity;

  friend bool operator==(const Component&, const Component&) = default;
};

struct Operation {
  std::string id;
  std::string name;
  std::string process_id;
  /// When absent the part's material completes the context.
  std::optional<std::string> material_id;
  std::optional<Expr> cycle_time_s;
  std::optional<Expr> parts_per_cycle;
  std::optional<Expr> machine_rate_per_h;
  std::optional<Expr> labor_rate_per_h;
  std::optional<Expr> crew_size;
  std::optional<Expr> scrap_rate;
  std::optional<Expr> consumable_cost_per_part;
  /// Cost entities charged per part in addition to the time-rate cost.
  std::vector<std::string> entities;
  /// Feature scope of the context tree.
  Scope params;

  friend bool operator==(const Operation&, const Operation&) = default;
};

struct Assembly {
  std::string id;
  std::string name;
  std::vector<std::string> components;
  std::vector<std::string> operations;
  std::string output_name;

  friend bool operator==(const Assembly&, const Assembly&) = default;
};

struct ScopeOwner {
  std::string id;
  Scope params;

  friend bool operator==(const ScopeOwner&, const ScopeOwner&) = default;
};

/// Part-level input the model expects every part spec to bind.
struct InputDecl {
  std::string name;
  std::string unit;

  friend bool operator==(const InputDecl&, const InputDecl&) = default;
};

struct CostModel {
  std::string id;
  std::string currency = "eur";
  Scope globals;
  std::vector<InputDecl> inputs;
  std::vector<ScopeOwner> processes;
  std::vector<ScopeOwner> materials;
  std::vector<CostEntity> entities;
  std::vector<Component> components;
  std::vector<Operation> operations;
  std::vector<Assembly> assemblies;
  std::string root_assembly;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

namespace detail {
template <class T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.id == id; });
  return it == items.end() ? nullptr : &*it;
}
}  // namespace detail

inline const ScopeOwner* find_process(const CostModel& m, std::string_view id) {
  return detail::find_by_id(m.processes, id);
}
inline const ScopeOwner* find_material(const CostModel& m, std::string_view id) {
  return detail::find_by_id(m.materials, id);
}
inline const CostEntity* find_entity(const CostModel& m, std::string_view id) {
  return detail::find_by_id(m.entities, id);
}
inline const Component* find_component(const CostModel& m, std::string_view id) {
  return detail::find_by_id(m.components, id);
}
inline const Operation* find_operation(const CostModel& m, std::string_view id) {
  return detail::find_by_id(m.operations, id);
}
inline const Assembly* find_assembly(const CostModel& m, std::string_view id) {
  return detail::find_by_id(m.assemblies, id);
}
inline bool is_input(const CostModel& m, std::string_view name) {
  return std::any_of(m.inputs.begin(), m.inputs.end(),
                     [&](const InputDecl& d) { return d.name == name; });
}

using ParamMap = std::map<std::string, double, std::less<>>;

/// Designer inputs for one part. `scenario` holds what-if overrides layered
/// above the part's own parameters.
struct PartSpec {
  std::string process_id;
  std::string material_id;
  ParamMap params;
  ParamMap scenario;

  friend bool operator==(const PartSpec&, const PartSpec&) = default;
};

struct Scenario {
  std::string id;
  std::string label;
  ParamMap overrides;
  /// Alloy change; replaces the part's material when set.
  std::optional<std::string> material_id;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct SeriesSpec {
  long long quantity = 1;
  double tooling_cost = 0.0;
};

}  // namespace castcost
