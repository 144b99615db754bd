#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "castcost/error.hpp"
#include "castcost/model.hpp"
#include "castcost/rollup.hpp"

namespace castcost {

/// Plant-specific overrides (hourly rates, yields, cadences, scrap rates).
struct RateTable {
  std::string plant_id;
  ParamMap overrides;

  bool operator==(const RateTable&) const = default;
};

/// Node-wise comparison of two breakdowns of the same shape.
struct DeltaTree {
  std::string label;
  bool leaf = false;
  double base_subtotal = 0.0;
  double variant_subtotal = 0.0;
  /// variant_subtotal - base_subtotal.
  double delta = 0.0;
  /// delta / base_subtotal; empty when the base is zero.
  std::optional<double> relative_delta;
  std::vector<DeltaTree> children;
};

namespace detail {

inline DeltaTree delta_node(std::string label, bool leaf, double base, double variant) {
  DeltaTree d;
  d.label = std::move(label);
  d.leaf = leaf;
  d.base_subtotal = base;
  d.variant_subtotal = variant;
  d.delta = variant - base;
  if (base != 0.0) d.relative_delta = d.delta / base;
  return d;
}

inline DeltaTree diff_nodes(const CostBreakdown& a, const CostBreakdown& b, const std::string& path) {
  if (a.label != b.label || a.kind != b.kind || a.children.size() != b.children.size()) {
    throw Error(ErrorCode::shape_mismatch,
                "breakdowns differ at '" + a.label + "' vs '" + b.label + "'", path);
  }
  DeltaTree d = delta_node(a.label, false, a.subtotal, b.subtotal);
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    const auto& ca = a.children[i];
    const auto& cb = b.children[i];
    if (ca.index() != cb.index()) {
      throw Error(ErrorCode::shape_mismatch, "node and line item at child " + std::to_string(i),
                  path);
    }
    if (auto* na = std::get_if<CostBreakdown>(&ca)) {
      d.children.push_back(diff_nodes(*na, std::get<CostBreakdown>(cb), path + "/" + na->label));
      continue;
    }
    const auto& la = std::get<LineItem>(ca);
    const auto& lb = std::get<LineItem>(cb);
    if (la.label != lb.label || la.source_id != lb.source_id) {
      throw Error(ErrorCode::shape_mismatch,
                  "line items differ: '" + la.label + "' vs '" + lb.label + "'", path);
    }
    d.children.push_back(delta_node(la.label, true, la.amount, lb.amount));
  }
  return d;
}

}  // namespace detail

inline DeltaTree diff_breakdowns(const CostBreakdown& base, const CostBreakdown& variant) {
  return detail::diff_nodes(base, variant, base.label);
}

struct SweepRow {
  double value = 0.0;
  double total = 0.0;
  std::optional<double> target_ratio;
};

/// One independent computation per value, each with the lever as a single
/// scenario override on top of `part`. Rows keep the order of `values`.
inline std::vector<SweepRow> sweep(const CostModel& model, const PartSpec& part,
                                   const std::string& lever, const std::vector<double>& values,
                                   std::optional<double> target = std::nullopt) {
  if (target && !(*target > 0.0)) {
    throw Error(ErrorCode::non_positive_target, "target cost must be > 0");
  }
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    Scenario s;
    s.id = "sweep";
    s.overrides[lever] = values[i];
    try {
      SweepRow row;
      row.value = values[i];
      row.total = compute_part_cost(model, part, &s).subtotal;
      if (target) row.target_ratio = target_indicator(row.total, *target);
      rows.push_back(row);
    } catch (Error& e) {
      e.prefix_location("values[" + std::to_string(i) + "]");
      throw;
    }
  }
  return rows;
}

struct BenchmarkRow {
  std::string plant_id;
  double total = 0.0;
  int rank = 0;
};

struct BenchmarkError {
  std::string plant_id;
  ErrorCode code = ErrorCode::invalid_input;
  std::string message;
  std::string location;
};

struct BenchmarkResult {
  /// Ordered by (total, plant_id).
  std::vector<BenchmarkRow> rows;
  /// Plants that could not be computed, in input order.
  std::vector<BenchmarkError> errors;
};

/// Per-plant totals with each table layered just below the scenario scope.
/// Ranks are dense over ascending totals; equal totals share a rank. A failing
/// plant is reported in `errors` and does not stop the others.
inline BenchmarkResult benchmark_compare(const CostModel& model, const PartSpec& part,
                                         const std::vector<RateTable>& tables,
                                         const Scenario* scenario = nullptr) {
  if (tables.empty()) throw Error(ErrorCode::invalid_input, "benchmark needs at least one rate table");
  const PartSpec base = scenario ? apply_scenario(model, part, *scenario) : part;
  BenchmarkResult out;
  for (const auto& t : tables) {
    try {
      for (const auto& [name, value] : t.overrides) {
        if (!is_overridable(model, base, name)) {
          throw Error(ErrorCode::unknown_override, "override '" + name + "' does not name a parameter");
        }
        if (!std::isfinite(value)) {
          throw Error(ErrorCode::invalid_input, "override '" + name + "' is not finite");
        }
      }
      double total = compute_with_overlays(model, base, {&t.overrides}).subtotal;
      out.rows.push_back({t.plant_id, total, 0});
    } catch (const Error& e) {
      out.errors.push_back({t.plant_id, e.code(), e.message(), e.location()});
    }
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    if (a.total != b.total) return a.total < b.total;
    return a.plant_id < b.plant_id;
  });
  int rank = 0;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    if (i == 0 || out.rows[i].total != out.rows[i - 1].total) ++rank;
    out.rows[i].rank = rank;
  }
  return out;
}

}  // namespace castcost
