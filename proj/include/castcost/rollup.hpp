#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "castcost/error.hpp"
#include "castcost/model.hpp"
#include "castcost/resolve.hpp"

namespace castcost {

/// One priced line, in currency per good unit of the immediate parent output.
struct LineItem {
  std::string source_id;
  std::string label;
  Category category = Category::material;
  double amount = 0.0;
  double quantity = 0.0;
  ContextPath context;
};

enum class NodeKind { assembly, component, operation };

inline std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::assembly: return "assembly";
    case NodeKind::component: return "component";
    case NodeKind::operation: return "operation";
  }
  return "?";
}

struct CostBreakdown;
using BreakdownChild = std::variant<CostBreakdown, LineItem>;

/// Priced tree mirroring the assembly DAG expansion. Amounts at every level are
/// per good unit of the root output. `subtotal` is the left-to-right sum of
/// the children and `category_totals` the per-category left-to-right sums.
struct CostBreakdown {
  std::string label;
  NodeKind kind = NodeKind::assembly;
  /// Assembly id for assembly and produced-component nodes, operation id for
  /// operation nodes.
  std::string source_id;
  std::vector<BreakdownChild> children;
  double subtotal = 0.0;
  std::map<Category, double> category_totals;
  double scrap_multiplier_applied = 1.0;
};

inline double child_amount(const BreakdownChild& c) {
  if (auto* n = std::get_if<CostBreakdown>(&c)) return n->subtotal;
  return std::get<LineItem>(c).amount;
}

/// Recomputes subtotal and category totals of `node` from its direct children.
inline void refold(CostBreakdown& node) {
  node.subtotal = 0.0;
  node.category_totals.clear();
  for (const auto& c : node.children) {
    node.subtotal += child_amount(c);
    if (auto* n = std::get_if<CostBreakdown>(&c)) {
      for (const auto& [cat, v] : n->category_totals) node.category_totals[cat] += v;
    } else {
      const auto& li = std::get<LineItem>(c);
      node.category_totals[li.category] += li.amount;
    }
  }
}

struct ScrapStage {
  double conversion_cost = 0.0;
  double scrap_rate = 0.0;
};

struct ScrapChainResult {
  double cost_per_good_part = 0.0;
  double cumulative_multiplier = 1.0;
};

/// Cₖ = (Cₖ₋₁ + conversionₖ) / (1 − scrapₖ): a part scrapped at stage k loses
/// everything accumulated through stage k.
inline ScrapChainResult apply_scrap_chain(std::span<const ScrapStage> stages, double upstream_cost) {
  ScrapChainResult r{upstream_cost, 1.0};
  for (const auto& s : stages) {
    if (!(s.scrap_rate >= 0.0 && s.scrap_rate < 1.0)) {
      throw Error(ErrorCode::scrap_rate_out_of_range,
                  "scrap rate " + std::to_string(s.scrap_rate) + " outside [0, 1)");
    }
    r.cost_per_good_part = (r.cost_per_good_part + s.conversion_cost) / (1.0 - s.scrap_rate);
    r.cumulative_multiplier *= 1.0 / (1.0 - s.scrap_rate);
  }
  return r;
}

inline ContextPath component_context(const PartSpec& part) {
  return ContextPath{part.process_id, part.material_id, std::nullopt};
}

inline ContextPath operation_context(const Operation& op, const PartSpec& part) {
  return ContextPath{op.process_id, op.material_id.value_or(part.material_id), op.id};
}

namespace detail {

inline double require(const std::optional<Expr>& e, const Resolver& r, const char* field) {
  if (!e) throw Error(ErrorCode::invalid_model, std::string("missing ") + field, field);
  try {
    return r.evaluate(*e);
  } catch (Error& err) {
    err.prefix_location(field);
    throw;
  }
}

inline double check_yield(double y) {
  if (!(y > 0.0 && y <= 1.0)) {
    throw Error(ErrorCode::yield_out_of_range,
                "material_yield " + std::to_string(y) + " outside (0, 1]", "material_yield");
  }
  return y;
}

/// Evaluated time-rate inputs of one operation.
struct OperationInputs {
  double cycle_time_s;
  double parts_per_cycle;
  double machine_rate_per_h;
  double labor_rate_per_h;
  double crew_size;
  double scrap_rate;
  double consumable_cost_per_part;

  double hours_per_part() const { return (cycle_time_s / 3600.0) / parts_per_cycle; }
};

inline OperationInputs evaluate_operation(const Operation& op, const Resolver& r) {
  OperationInputs in{};
  in.cycle_time_s = require(op.cycle_time_s, r, "cycle_time_s");
  in.parts_per_cycle = require(op.parts_per_cycle, r, "parts_per_cycle");
  in.machine_rate_per_h = require(op.machine_rate_per_h, r, "machine_rate_per_h");
  in.labor_rate_per_h = require(op.labor_rate_per_h, r, "labor_rate_per_h");
  in.crew_size = require(op.crew_size, r, "crew_size");
  in.scrap_rate = require(op.scrap_rate, r, "scrap_rate");
  in.consumable_cost_per_part = require(op.consumable_cost_per_part, r, "consumable_cost_per_part");
  if (!(in.parts_per_cycle >= 1.0)) {
    throw Error(ErrorCode::parts_per_cycle_out_of_range,
                "parts_per_cycle " + std::to_string(in.parts_per_cycle) + " < 1", "parts_per_cycle");
  }
  if (!(in.scrap_rate >= 0.0 && in.scrap_rate < 1.0)) {
    throw Error(ErrorCode::scrap_rate_out_of_range,
                "scrap_rate " + std::to_string(in.scrap_rate) + " outside [0, 1)", "scrap_rate");
  }
  if (in.crew_size < 0.0) {
    throw Error(ErrorCode::invalid_model, "crew_size must be >= 0", "crew_size");
  }
  if (in.cycle_time_s < 0.0) {
    throw Error(ErrorCode::invalid_model, "cycle_time_s must be >= 0", "cycle_time_s");
  }
  return in;
}

}  // namespace detail

/// Purchased: qty × unit_cost / yield. Produced: qty × sub-assembly subtotal / yield.
inline LineItem component_cost(const CostModel& model, const Component& c, const ContextPath& ctx,
                               const Overlays& overlays,
                               std::optional<double> sub_assembly_subtotal = std::nullopt) {
  Resolver r(model, ctx, overlays);
  LineItem li;
  li.source_id = c.id;
  li.label = c.id;
  li.context = ctx;
  li.category = Category::material;
  if (c.entity) {
    if (const CostEntity* e = find_entity(model, *c.entity)) li.category = e->category;
  }
  try {
    li.quantity = detail::require(c.quantity_per_output, r, "quantity_per_output");
    double yield = detail::check_yield(detail::require(c.material_yield, r, "material_yield"));
    double per_unit = 0.0;
    if (c.kind == ComponentKind::purchased) {
      per_unit = detail::require(c.unit_cost, r, "unit_cost");
    } else {
      if (!sub_assembly_subtotal) {
        throw Error(ErrorCode::invalid_model, "produced component needs its sub-assembly rollup");
      }
      per_unit = *sub_assembly_subtotal;
    }
    li.amount = detail::checked(li.quantity * per_unit / yield);
  } catch (Error& e) {
    e.prefix_location(c.id);
    throw;
  }
  return li;
}

/// (cycle_time_s / 3600) / parts_per_cycle × (machine_rate + labor_rate × crew)
/// + consumables. Scrap is applied by the assembly's chain, not here.
inline LineItem operation_cost(const CostModel& model, const Operation& op, const ContextPath& ctx,
                               const Overlays& overlays) {
  Resolver r(model, ctx, overlays);
  LineItem li;
  li.source_id = op.id;
  li.label = op.id;
  li.context = ctx;
  li.category = Category::machine;
  try {
    auto in = detail::evaluate_operation(op, r);
    li.quantity = in.hours_per_part();
    li.amount = detail::checked(li.quantity * (in.machine_rate_per_h +
                                               in.labor_rate_per_h * in.crew_size) +
                                in.consumable_cost_per_part);
  } catch (Error& e) {
    e.prefix_location(op.id);
    throw;
  }
  return li;
}

namespace detail {

inline CostBreakdown scaled(const CostBreakdown& node, double qty, double yield) {
  CostBreakdown out;
  out.label = node.label;
  out.kind = node.kind;
  out.source_id = node.source_id;
  out.scrap_multiplier_applied = node.scrap_multiplier_applied;
  out.children.reserve(node.children.size());
  for (const auto& c : node.children) {
    if (auto* n = std::get_if<CostBreakdown>(&c)) {
      out.children.emplace_back(scaled(*n, qty, yield));
    } else {
      LineItem li = std::get<LineItem>(c);
      li.amount = li.amount * qty / yield;
      out.children.emplace_back(std::move(li));
    }
  }
  refold(out);
  return out;
}

class RollupEngine {
 public:
  RollupEngine(const CostModel& model, const PartSpec& part, Overlays overlays)
      : m_(model), part_(part), overlays_(std::move(overlays)) {}

  CostBreakdown run() {
    for (const auto& in : m_.inputs) {
      bool bound = part_.params.count(in.name) || part_.scenario.count(in.name);
      for (const ParamMap* layer : overlays_) bound = bound || (layer && layer->count(in.name));
      if (!bound) {
        throw Error(ErrorCode::missing_input, "part spec does not bind input '" + in.name + "'");
      }
    }
    return assembly(m_.root_assembly);
  }

 private:
  const CostBreakdown& assembly(const std::string& id) {
    if (auto it = memo_.find(id); it != memo_.end()) return it->second;
    const Assembly* a = find_assembly(m_, id);
    if (!a) throw Error(ErrorCode::invalid_model, "unresolved assembly '" + id + "'", id);
    if (!visiting_.insert(id).second) {
      throw Error(ErrorCode::invalid_model, "cyclic assembly graph at '" + id + "'", id);
    }
    CostBreakdown node;
    try {
      node = evaluate(*a);
    } catch (Error& e) {
      e.prefix_location(id);
      throw;
    }
    visiting_.erase(id);
    return memo_.emplace(id, std::move(node)).first->second;
  }

  CostBreakdown evaluate(const Assembly& a) {
    CostBreakdown node;
    node.label = a.id;
    node.kind = NodeKind::assembly;
    node.source_id = a.id;
    const ContextPath part_ctx = component_context(part_);

    double running = 0.0;
    for (const auto& cid : a.components) {
      const Component* c = find_component(m_, cid);
      if (!c) throw Error(ErrorCode::invalid_model, "unresolved component '" + cid + "'", cid);
      if (c->kind == ComponentKind::purchased) {
        LineItem li = component_cost(m_, *c, part_ctx, overlays_);
        running += li.amount;
        node.children.emplace_back(std::move(li));
        continue;
      }
      if (!c->sub_assembly) {
        throw Error(ErrorCode::invalid_model, "produced component without sub_assembly", cid);
      }
      const CostBreakdown& sub = assembly(*c->sub_assembly);
      Resolver r(m_, part_ctx, overlays_);
      double qty = 0.0;
      double yield = 1.0;
      try {
        qty = require(c->quantity_per_output, r, "quantity_per_output");
        yield = check_yield(require(c->material_yield, r, "material_yield"));
      } catch (Error& e) {
        e.prefix_location(cid);
        throw;
      }
      CostBreakdown child = scaled(sub, qty, yield);
      child.label = c->id;
      child.kind = NodeKind::component;
      running += child.subtotal;
      node.children.emplace_back(std::move(child));
    }

    double multiplier = 1.0;
    for (const auto& oid : a.operations) {
      const Operation* op = find_operation(m_, oid);
      if (!op) throw Error(ErrorCode::invalid_model, "unresolved operation '" + oid + "'", oid);
      CostBreakdown opnode;
      try {
        opnode = evaluate_operation_node(*op, running, multiplier);
      } catch (Error& e) {
        e.prefix_location(oid);
        throw;
      }
      running += opnode.subtotal;
      node.children.emplace_back(std::move(opnode));
    }
    refold(node);
    node.scrap_multiplier_applied = multiplier;
    return node;
  }

  CostBreakdown evaluate_operation_node(const Operation& op, double upstream, double& multiplier) {
    const ContextPath ctx = operation_context(op, part_);
    Resolver r(m_, ctx, overlays_);
    const OperationInputs in = evaluate_operation(op, r);
    const double hours = in.hours_per_part();

    CostBreakdown node;
    node.label = op.id;
    node.kind = NodeKind::operation;
    node.source_id = op.id;
    auto add = [&](std::string label, Category cat, double amount, double quantity) {
      node.children.emplace_back(
          LineItem{op.id, std::move(label), cat, checked(amount), quantity, ctx});
    };
    add("machine", Category::machine, hours * in.machine_rate_per_h, hours);
    add("labor", Category::labor, hours * in.labor_rate_per_h * in.crew_size,
        hours * in.crew_size);
    add("consumables", Category::consumable, in.consumable_cost_per_part, 1.0);
    for (const auto& eid : op.entities) {
      const CostEntity* ent = find_entity(m_, eid);
      if (!ent) throw Error(ErrorCode::invalid_model, "unresolved entity '" + eid + "'", eid);
      double driver = 0.0;
      double amount = 0.0;
      try {
        driver = r.resolve(ent->driver);
        amount = entity_cost(m_, *ent, ctx, overlays_);
      } catch (Error& e) {
        e.prefix_location(eid);
        throw;
      }
      add(eid, ent->category, amount, driver);
    }
    double conversion = 0.0;
    for (const auto& c : node.children) conversion += child_amount(c);
    const double forfeited = (upstream + conversion) * in.scrap_rate / (1.0 - in.scrap_rate);
    add("scrap", Category::scrap, forfeited, in.scrap_rate);
    multiplier *= 1.0 / (1.0 - in.scrap_rate);
    refold(node);
    node.scrap_multiplier_applied = 1.0 / (1.0 - in.scrap_rate);
    return node;
  }

  const CostModel& m_;
  const PartSpec& part_;
  Overlays overlays_;
  std::map<std::string, CostBreakdown> memo_;
  std::set<std::string> visiting_;
};

}  // namespace detail

/// Rollup with explicit overlay layers (highest precedence first). The part's
/// own `scenario` and `params` layers are appended below `extra`.
inline CostBreakdown compute_with_overlays(const CostModel& model, const PartSpec& part,
                                           const Overlays& extra) {
  Overlays overlays;
  overlays.push_back(&part.scenario);
  for (const ParamMap* layer : extra) overlays.push_back(layer);
  overlays.push_back(&part.params);
  return detail::RollupEngine(model, part, std::move(overlays)).run();
}

/// True when `name` is bound somewhere a scenario override could shadow it.
inline bool is_overridable(const CostModel& model, const PartSpec& part, std::string_view name) {
  if (part.params.count(name) || part.scenario.count(name) || is_input(model, name)) return true;
  if (find_parameter(model.globals, name)) return true;
  for (const auto& p : model.processes) {
    if (find_parameter(p.params, name)) return true;
  }
  for (const auto& p : model.materials) {
    if (find_parameter(p.params, name)) return true;
  }
  for (const auto& op : model.operations) {
    if (find_parameter(op.params, name)) return true;
  }
  return false;
}

/// Layers the scenario's overrides on top of the part; `part` is not modified.
inline PartSpec apply_scenario(const CostModel& model, const PartSpec& part, const Scenario& s) {
  PartSpec out = part;
  for (const auto& [name, value] : s.overrides) {
    if (!is_overridable(model, part, name)) {
      throw Error(ErrorCode::unknown_override, "override '" + name + "' does not name a parameter",
                  s.id);
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::invalid_input, "override '" + name + "' is not finite", s.id);
    }
    out.scenario[name] = value;
  }
  if (s.material_id) {
    if (!find_material(model, *s.material_id)) {
      throw Error(ErrorCode::unknown_override, "unknown material '" + *s.material_id + "'", s.id);
    }
    out.material_id = *s.material_id;
  }
  return out;
}

/// Per-part direct cost breakdown rooted at the model's root assembly.
inline CostBreakdown compute_part_cost(const CostModel& model, const PartSpec& part,
                                       const Scenario* scenario = nullptr) {
  if (scenario) return compute_with_overlays(model, apply_scenario(model, part, *scenario), {});
  return compute_with_overlays(model, part, {});
}

inline double amortize_series(double direct_cost_per_part, const SeriesSpec& series) {
  if (series.quantity < 1) throw Error(ErrorCode::invalid_input, "series quantity must be >= 1");
  if (!(series.tooling_cost >= 0.0) || !std::isfinite(series.tooling_cost)) {
    throw Error(ErrorCode::invalid_input, "tooling cost must be a finite value >= 0");
  }
  return direct_cost_per_part + series.tooling_cost / static_cast<double>(series.quantity);
}

inline double target_indicator(double actual_cost, double target_cost) {
  if (!(target_cost > 0.0)) throw Error(ErrorCode::non_positive_target, "target cost must be > 0");
  return actual_cost / target_cost;
}

inline double budget_overrun_indicator(double actual_spend, double budget) {
  if (!(budget > 0.0)) throw Error(ErrorCode::non_positive_budget, "budget must be > 0");
  return std::max(actual_spend - budget, 0.0) / budget;
}

}  // namespace castcost
