#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "castcost/expr.hpp"
#include "castcost/model.hpp"
#include "castcost/resolve.hpp"

namespace castcost {

enum class Severity { error, warning };

inline std::string_view to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

/// `location` is a structural path such as "operation:pouring.scrap_rate".
struct Diagnostic {
  Severity severity = Severity::error;
  std::string location;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

namespace detail {

class ModelValidator {
 public:
  explicit ModelValidator(const CostModel& m) : m_(m) {}

  std::vector<Diagnostic> run() {
    check_identifiers_and_duplicates();
    check_scopes();
    check_entities();
    check_components();
    check_operations();
    check_assemblies();
    check_graph();
    std::vector<Diagnostic> out(found_.begin(), found_.end());
    std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
      return std::tie(a.location, a.message) < std::tie(b.location, b.message);
    });
    return out;
  }

 private:
  struct DiagLess {
    bool operator()(const Diagnostic& a, const Diagnostic& b) const {
      return std::tie(a.location, a.message, a.severity) <
             std::tie(b.location, b.message, b.severity);
    }
  };

  /// Which scopes are in play when an expression is evaluated. A null process
  /// or material means "whatever the part spec selects".
  struct EvalSite {
    const Operation* feature = nullptr;
    const ScopeOwner* process = nullptr;
    const ScopeOwner* material = nullptr;
  };

  void error(std::string loc, std::string msg) {
    found_.insert({Severity::error, std::move(loc), std::move(msg)});
  }
  void warning(std::string loc, std::string msg) {
    found_.insert({Severity::warning, std::move(loc), std::move(msg)});
  }

  template <class T>
  void check_unique(const std::vector<T>& items, const std::string& kind) {
    std::map<std::string, int> seen;
    for (const auto& x : items) {
      if (!is_valid_identifier(x.id)) error(kind + ":" + x.id, "invalid identifier '" + x.id + "'");
      if (++seen[x.id] == 2) error(kind + ":" + x.id, "duplicate " + kind + " id " + x.id);
    }
  }

  void check_identifiers_and_duplicates() {
    check_unique(m_.processes, "process");
    check_unique(m_.materials, "material");
    check_unique(m_.entities, "entity");
    check_unique(m_.components, "component");
    check_unique(m_.operations, "operation");
    check_unique(m_.assemblies, "assembly");
    std::map<std::string, int> seen;
    for (const auto& in : m_.inputs) {
      if (!is_valid_identifier(in.name)) error("input:" + in.name, "invalid identifier");
      if (++seen[in.name] == 2) error("input:" + in.name, "duplicate input " + in.name);
    }
  }

  void check_scope(const Scope& scope, const std::string& owner) {
    std::map<std::string, int> seen;
    for (const auto& p : scope) {
      std::string loc = owner + "." + p.name;
      if (!is_valid_identifier(p.name)) error(loc, "invalid identifier '" + p.name + "'");
      if (++seen[p.name] == 2) error(loc, "duplicate parameter " + p.name);
      if (const double* v = std::get_if<double>(&p.value); v && !std::isfinite(*v)) {
        error(loc, "literal value is not finite");
      }
      if (const Expr* e = std::get_if<Expr>(&p.value)) check_literals(*e, loc);
    }
  }

  void check_scopes() {
    check_scope(m_.globals, "global");
    for (const auto& p : m_.processes) check_scope(p.params, "process:" + p.id);
    for (const auto& p : m_.materials) check_scope(p.params, "material:" + p.id);
    for (const auto& op : m_.operations) check_scope(op.params, "operation:" + op.id);
  }

  void check_literals(const Expr& e, const std::string& loc) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, NumberNode>) {
            if (!std::isfinite(n.value)) error(loc, "literal value is not finite");
          } else if constexpr (std::is_same_v<T, NegateNode>) {
            check_literals(n.operand, loc);
          } else if constexpr (std::is_same_v<T, BinaryNode>) {
            check_literals(n.lhs, loc);
            check_literals(n.rhs, loc);
          } else if constexpr (std::is_same_v<T, CallNode>) {
            if (n.args.size() != builtin_arity(n.fn)) error(loc, "wrong builtin arity");
            for (const auto& a : n.args) check_literals(a, loc);
          }
        },
        e.node().value);
  }

  // Unit labels of a bare name, if every definition agrees on one.
  std::optional<std::string> unit_of(const std::string& name) const {
    std::set<std::string> units;
    auto scan = [&](const Scope& s) {
      if (auto* p = find_parameter(s, name); p && !p->unit.empty()) units.insert(p->unit);
    };
    scan(m_.globals);
    for (const auto& p : m_.processes) scan(p.params);
    for (const auto& p : m_.materials) scan(p.params);
    for (const auto& op : m_.operations) scan(op.params);
    for (const auto& in : m_.inputs) {
      if (in.name == name && !in.unit.empty()) units.insert(in.unit);
    }
    if (units.size() == 1) return *units.begin();
    return std::nullopt;
  }

  void check_unit_mix(const Expr& e, const std::string& loc) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, NegateNode>) {
            check_unit_mix(n.operand, loc);
          } else if constexpr (std::is_same_v<T, BinaryNode>) {
            if (n.op == BinaryOp::add || n.op == BinaryOp::sub) {
              auto* a = std::get_if<VariableNode>(&n.lhs.node().value);
              auto* b = std::get_if<VariableNode>(&n.rhs.node().value);
              if (a && b) {
                auto ua = unit_of(a->name);
                auto ub = unit_of(b->name);
                if (ua && ub && *ua != *ub) {
                  warning(loc, "suspicious unit mix: " + a->name + " [" + *ua + "] " +
                                   static_cast<char>(n.op) + " " + b->name + " [" + *ub + "]");
                }
              }
            }
            check_unit_mix(n.lhs, loc);
            check_unit_mix(n.rhs, loc);
          } else if constexpr (std::is_same_v<T, CallNode>) {
            for (const auto& a : n.args) check_unit_mix(a, loc);
          }
        },
        e.node().value);
  }

  // Guarantees that `name` binds at `site` for any part spec that supplies
  // every declared input, and that every definition that could win binds too.
  void check_name(const std::string& name, const EvalSite& site, const std::string& loc,
                  std::vector<std::string>& chain) {
    if (is_input(m_, name)) return;
    std::vector<const Parameter*> candidates;
    bool guaranteed = false;
    if (site.feature) {
      if (auto* p = find_parameter(site.feature->params, name)) {
        candidates.push_back(p);
        guaranteed = true;
      }
    }
    auto scan_level = [&](const ScopeOwner* fixed, const std::vector<ScopeOwner>& all) {
      if (fixed) {
        if (auto* p = find_parameter(fixed->params, name)) {
          candidates.push_back(p);
          guaranteed = true;
        }
        return;
      }
      bool everywhere = !all.empty();
      for (const auto& owner : all) {
        if (auto* p = find_parameter(owner.params, name)) {
          candidates.push_back(p);
        } else {
          everywhere = false;
        }
      }
      guaranteed = guaranteed || everywhere;
    };
    scan_level(site.material, m_.materials);
    scan_level(site.process, m_.processes);
    if (auto* p = find_parameter(m_.globals, name)) {
      candidates.push_back(p);
      guaranteed = true;
    }
    if (candidates.empty()) {
      error(loc, "unresolved parameter '" + name + "'");
      return;
    }
    if (!guaranteed) {
      error(loc, "parameter '" + name + "' is not defined for every process/material a part may use");
    }
    for (const Parameter* p : candidates) {
      const Expr* e = std::get_if<Expr>(&p->value);
      if (!e) continue;
      if (std::find(chain.begin(), chain.end(), name) != chain.end()) {
        std::string cyc;
        for (const auto& c : chain) cyc += c + " -> ";
        error(loc, "cyclic parameter reference " + cyc + name);
        continue;
      }
      if (chain.size() >= static_cast<std::size_t>(kMaxParameterDepth)) {
        error(loc, "parameter reference chain deeper than " + std::to_string(kMaxParameterDepth));
        continue;
      }
      chain.push_back(name);
      for (const auto& v : free_variables(*e)) check_name(v, site, loc, chain);
      chain.pop_back();
    }
  }

  void check_expr(const std::optional<Expr>& e, const EvalSite& site, const std::string& loc,
                  bool required = true) {
    if (!e) {
      if (required) error(loc, "missing value");
      return;
    }
    check_literals(*e, loc);
    check_unit_mix(*e, loc);
    std::vector<std::string> chain;
    for (const auto& v : free_variables(*e)) check_name(v, site, loc, chain);
  }

  template <class Pred>
  void check_literal_range(const std::optional<Expr>& e, const std::string& loc, Pred ok,
                           const std::string& what) {
    if (!e) return;
    if (auto* n = std::get_if<NumberNode>(&e->node().value); n && !ok(n->value)) {
      error(loc, what);
    }
  }

  void check_entities() {
    for (const auto& ent : m_.entities) {
      std::string loc = "entity:" + ent.id;
      if (!ent.formula) {
        error(loc + ".formula", "missing value");
        continue;
      }
      if (!is_valid_identifier(ent.driver)) {
        error(loc + ".driver", "entity needs exactly one driver parameter");
      } else if (!free_variables(*ent.formula).count(ent.driver)) {
        error(loc + ".driver", "driver '" + ent.driver + "' does not appear in the formula");
      }
      if (contains_negation(*ent.formula)) {
        warning(loc + ".formula", "formula may produce a credit (negative cost)");
      }
      bool attached = false;
      for (const auto& op : m_.operations) {
        if (std::find(op.entities.begin(), op.entities.end(), ent.id) != op.entities.end()) {
          attached = true;
        }
      }
      for (const auto& c : m_.components) {
        if (c.entity == ent.id) attached = true;
      }
      if (!attached) {
        warning(loc, "entity is not attached to any operation or component");
        check_expr(ent.formula, EvalSite{}, loc + ".formula");
      }
    }
  }

  void check_components() {
    for (const auto& c : m_.components) {
      std::string loc = "component:" + c.id;
      EvalSite part_site;
      check_expr(c.quantity_per_output, part_site, loc + ".quantity_per_output");
      check_expr(c.material_yield, part_site, loc + ".material_yield");
      check_literal_range(
          c.material_yield, loc + ".material_yield", [](double y) { return y > 0.0 && y <= 1.0; },
          "material_yield must lie in (0, 1]");
      if (c.kind == ComponentKind::purchased) {
        if (!c.unit_cost) error(loc + ".unit_cost", "purchased component needs unit_cost");
        if (c.sub_assembly) error(loc + ".sub_assembly", "purchased component cannot have sub_assembly");
        check_expr(c.unit_cost, part_site, loc + ".unit_cost", false);
      } else {
        if (c.unit_cost) error(loc + ".unit_cost", "produced component cannot have unit_cost");
        if (!c.sub_assembly) {
          error(loc + ".sub_assembly", "produced component needs sub_assembly");
        } else if (!find_assembly(m_, *c.sub_assembly)) {
          error(loc + ".sub_assembly", "unresolved id " + *c.sub_assembly);
        }
      }
      if (c.entity && !find_entity(m_, *c.entity)) {
        error(loc + ".entity", "unresolved id " + *c.entity);
      }
      bool used = false;
      for (const auto& a : m_.assemblies) {
        if (std::find(a.components.begin(), a.components.end(), c.id) != a.components.end()) {
          used = true;
        }
      }
      if (!used) warning(loc, "component is not used by any assembly");
    }
  }

  void check_operations() {
    for (const auto& op : m_.operations) {
      std::string loc = "operation:" + op.id;
      EvalSite site;
      site.feature = &op;
      site.process = find_process(m_, op.process_id);
      if (!site.process) error(loc + ".process", "unresolved id " + op.process_id);
      if (op.material_id) {
        site.material = find_material(m_, *op.material_id);
        if (!site.material) error(loc + ".material", "unresolved id " + *op.material_id);
      }
      if (!site.process) continue;
      check_expr(op.cycle_time_s, site, loc + ".cycle_time_s");
      check_expr(op.parts_per_cycle, site, loc + ".parts_per_cycle");
      check_expr(op.machine_rate_per_h, site, loc + ".machine_rate_per_h");
      check_expr(op.labor_rate_per_h, site, loc + ".labor_rate_per_h");
      check_expr(op.crew_size, site, loc + ".crew_size");
      check_expr(op.scrap_rate, site, loc + ".scrap_rate");
      check_expr(op.consumable_cost_per_part, site, loc + ".consumable_cost_per_part");
      check_literal_range(
          op.parts_per_cycle, loc + ".parts_per_cycle", [](double v) { return v >= 1.0; },
          "parts_per_cycle must be >= 1");
      check_literal_range(
          op.scrap_rate, loc + ".scrap_rate", [](double v) { return v >= 0.0 && v < 1.0; },
          "scrap_rate must lie in [0, 1)");
      check_literal_range(
          op.crew_size, loc + ".crew_size", [](double v) { return v >= 0.0; },
          "crew_size must be >= 0");
      check_literal_range(
          op.cycle_time_s, loc + ".cycle_time_s", [](double v) { return v >= 0.0; },
          "cycle_time_s must be >= 0");
      std::set<std::string> seen;
      for (const auto& ent_id : op.entities) {
        if (!seen.insert(ent_id).second) error(loc + ".entities", "entity " + ent_id + " repeated");
        const CostEntity* ent = find_entity(m_, ent_id);
        if (!ent) {
          error(loc + ".entities", "unresolved id " + ent_id);
          continue;
        }
        check_expr(ent->formula, site, loc + ".entities." + ent_id);
      }
      bool used = false;
      for (const auto& a : m_.assemblies) {
        if (std::find(a.operations.begin(), a.operations.end(), op.id) != a.operations.end()) {
          used = true;
        }
      }
      if (!used) warning(loc, "operation is not used by any assembly");
    }
  }

  void check_assemblies() {
    for (const auto& a : m_.assemblies) {
      std::string loc = "assembly:" + a.id;
      if (a.components.empty() && a.operations.empty()) {
        error(loc, "assembly has neither components nor operations");
      }
      std::set<std::string> seen;
      for (const auto& c : a.components) {
        if (!seen.insert(c).second) error(loc + ".components", "id " + c + " repeated");
        if (!find_component(m_, c)) error(loc + ".components", "unresolved id " + c);
      }
      seen.clear();
      for (const auto& o : a.operations) {
        if (!seen.insert(o).second) error(loc + ".operations", "id " + o + " repeated");
        if (!find_operation(m_, o)) error(loc + ".operations", "unresolved id " + o);
      }
    }
    if (m_.root_assembly.empty()) {
      error("model.root", "no root assembly");
    } else if (!find_assembly(m_, m_.root_assembly)) {
      error("model.root", "unresolved id " + m_.root_assembly);
    }
  }

  // Edges assembly -> sub-assembly through produced components.
  std::vector<std::vector<std::size_t>> assembly_edges() const {
    std::vector<std::vector<std::size_t>> edges(m_.assemblies.size());
    for (std::size_t i = 0; i < m_.assemblies.size(); ++i) {
      for (const auto& cid : m_.assemblies[i].components) {
        const Component* c = find_component(m_, cid);
        if (!c || c->kind != ComponentKind::produced || !c->sub_assembly) continue;
        for (std::size_t j = 0; j < m_.assemblies.size(); ++j) {
          if (m_.assemblies[j].id == *c->sub_assembly) {
            edges[i].push_back(j);
            break;
          }
        }
      }
    }
    return edges;
  }

  void check_graph() {
    const auto edges = assembly_edges();
    const std::size_t n = edges.size();

    // Tarjan's strongly connected components.
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    int counter = 0;
    std::function<void(std::size_t)> connect = [&](std::size_t v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = true;
      for (std::size_t w : edges[v]) {
        if (index[w] < 0) {
          connect(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      }
      if (low[v] != index[v]) return;
      std::vector<std::size_t> members;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        members.push_back(w);
      } while (w != v);
      bool self_loop = std::find(edges[v].begin(), edges[v].end(), v) != edges[v].end();
      if (members.size() > 1 || self_loop) {
        std::sort(members.begin(), members.end());
        std::string msg = "cycle ";
        for (std::size_t k = 0; k < members.size(); ++k) {
          if (k) msg += ",";
          msg += m_.assemblies[members[k]].id;
        }
        error("assembly:" + m_.assemblies[members.front()].id, msg);
      }
    };
    for (std::size_t v = 0; v < n; ++v) {
      if (index[v] < 0) connect(v);
    }

    std::size_t root = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (m_.assemblies[i].id == m_.root_assembly) {
        root = i;
        break;
      }
    }
    if (root == n) return;
    std::vector<bool> reached(n, false);
    std::vector<std::size_t> todo{root};
    reached[root] = true;
    while (!todo.empty()) {
      std::size_t v = todo.back();
      todo.pop_back();
      for (std::size_t w : edges[v]) {
        if (!reached[w]) {
          reached[w] = true;
          todo.push_back(w);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!reached[i]) warning("assembly:" + m_.assemblies[i].id, "assembly unreachable from root");
    }
  }

  const CostModel& m_;
  std::set<Diagnostic, DiagLess> found_;
};

}  // namespace detail

/// Structural and resolvability checks. An empty result means the model can
/// be evaluated for any part spec that binds every declared input.
inline std::vector<Diagnostic> validate_model(const CostModel& model) {
  return detail::ModelValidator(model).run();
}

}  // namespace castcost
