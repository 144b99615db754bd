#pragma once

// Report serialization and the JSON input files (part, scenario, series, rate
// table). Amounts are written with 6 decimals. Every node's serialized value
// is its own subtotal rounded half-even; children and category totals are then
// apportioned in micro-units (largest remainder) so that the serialized
// children of a node add up to the serialized node exactly.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "castcost/error.hpp"
#include "castcost/expr.hpp"
#include "castcost/model.hpp"
#include "castcost/rollup.hpp"
#include "castcost/scenario.hpp"
#include "castcost/validate.hpp"

namespace castcost {

__extension__ typedef __int128 Micro;

namespace detail {

/// Nearest micro-unit count of `x`, ties to even, from the exact binary value.
inline Micro round_micro(double x) {
  if (!std::isfinite(x) || std::fabs(x) >= 1e30) {
    throw Error(ErrorCode::non_finite_result, "amount cannot be serialized");
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 6);
  Micro v = 0;
  bool neg = false;
  for (const char* p = buf; p != ptr; ++p) {
    if (*p == '-') {
      neg = true;
    } else if (*p >= '0' && *p <= '9') {
      v = v * 10 + (*p - '0');
    }
  }
  return neg ? -v : v;
}

inline std::string micro_text(Micro v) {
  bool neg = v < 0;
  if (neg) v = -v;
  std::string digits;
  do {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  } while (v != 0);
  while (digits.size() < 7) digits.insert(digits.begin(), '0');
  digits.insert(digits.end() - 6, '.');
  return neg ? "-" + digits : digits;
}

/// Splits `target` micro-units over `values` so that the parts sum to it,
/// starting from each value's own rounding and moving single units by largest
/// remainder (ties to the earlier entry).
inline std::vector<Micro> apportion(const std::vector<double>& values, Micro target) {
  std::vector<Micro> out(values.size());
  if (values.empty()) return out;
  std::vector<double> rem(values.size());
  Micro sum = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = round_micro(values[i]);
    rem[i] = values[i] * 1e6 - static_cast<double>(out[i]);
    sum += out[i];
  }
  Micro diff = target - sum;
  if (diff == 0) return out;
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (diff > 0) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  } else {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] < rem[b]; });
  }
  const Micro step = diff > 0 ? 1 : -1;
  for (std::size_t k = 0; diff != 0; k = (k + 1) % order.size()) {
    out[order[k]] += step;
    diff -= step;
  }
  return out;
}

/// Serialized amounts of one breakdown node and, recursively, its children.
struct MicroTree {
  Micro subtotal = 0;
  std::vector<std::pair<Category, Micro>> categories;
  /// One entry per child; line items have no children of their own.
  std::vector<MicroTree> children;
};

inline std::vector<std::pair<Category, double>> category_list(const CostBreakdown& b) {
  std::vector<std::pair<Category, double>> out;
  for (Category c : kAllCategories) {
    auto it = b.category_totals.find(c);
    out.emplace_back(c, it == b.category_totals.end() ? 0.0 : it->second);
  }
  return out;
}

inline MicroTree allocate(const CostBreakdown& b, Micro target) {
  MicroTree t;
  t.subtotal = target;
  auto cats = category_list(b);
  std::vector<double> cat_values;
  for (const auto& [c, v] : cats) cat_values.push_back(v);
  auto cat_micro = apportion(cat_values, target);
  for (std::size_t i = 0; i < cats.size(); ++i) t.categories.emplace_back(cats[i].first, cat_micro[i]);

  std::vector<double> values;
  for (const auto& c : b.children) values.push_back(child_amount(c));
  auto micro = apportion(values, target);
  for (std::size_t i = 0; i < b.children.size(); ++i) {
    if (auto* n = std::get_if<CostBreakdown>(&b.children[i])) {
      t.children.push_back(allocate(*n, micro[i]));
    } else {
      MicroTree leaf;
      leaf.subtotal = micro[i];
      t.children.push_back(std::move(leaf));
    }
  }
  return t;
}

inline MicroTree allocate(const CostBreakdown& b) { return allocate(b, round_micro(b.subtotal)); }

/// Same apportioning for one side (base or variant) of a delta tree.
inline MicroTree allocate_delta(const DeltaTree& d, bool variant, Micro target) {
  MicroTree t;
  t.subtotal = target;
  std::vector<double> values;
  for (const auto& c : d.children) values.push_back(variant ? c.variant_subtotal : c.base_subtotal);
  auto micro = apportion(values, target);
  for (std::size_t i = 0; i < d.children.size(); ++i) {
    t.children.push_back(allocate_delta(d.children[i], variant, micro[i]));
  }
  return t;
}

inline std::string format_ratio(double v) {
  std::string s;
  append_number(s, v);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace detail

/// Minimal pretty-printing JSON writer with deterministic layout: two-space
/// indentation, keys in insertion order, empty containers as [] and {}.
class JsonWriter {
 public:
  JsonWriter& begin_object() {
    open('{', false);
    return *this;
  }
  JsonWriter& end_object() {
    close('}');
    return *this;
  }
  JsonWriter& begin_array() {
    open('[', true);
    return *this;
  }
  JsonWriter& end_array() {
    close(']');
    return *this;
  }

  JsonWriter& key(std::string_view k) {
    separate();
    quote(k);
    out_ += ": ";
    after_key_ = true;
    return *this;
  }

  JsonWriter& string(std::string_view s) {
    value_prefix();
    quote(s);
    return *this;
  }
  /// Writes `text` verbatim as a JSON number.
  JsonWriter& raw(std::string_view text) {
    value_prefix();
    out_ += text;
    return *this;
  }
  JsonWriter& number(double v) {
    std::string s;
    detail::append_number(s, v);
    return raw(s);
  }
  JsonWriter& integer(long long v) { return raw(std::to_string(v)); }
  JsonWriter& boolean(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& null() { return raw("null"); }

  const std::string& str() const { return out_; }
  std::string take() {
    out_ += '\n';
    return std::move(out_);
  }

 private:
  struct Frame {
    bool array;
    bool empty = true;
  };

  void indent(std::size_t depth) {
    out_ += '\n';
    out_.append(depth * 2, ' ');
  }

  void separate() {
    if (stack_.empty()) return;
    Frame& f = stack_.back();
    if (!f.empty) out_ += ',';
    f.empty = false;
    indent(stack_.size());
  }

  void value_prefix() {
    if (after_key_) {
      after_key_ = false;
      return;
    }
    separate();
  }

  void open(char c, bool array) {
    value_prefix();
    out_ += c;
    stack_.push_back({array});
  }

  void close(char c) {
    bool empty = stack_.back().empty;
    stack_.pop_back();
    if (!empty) indent(stack_.size());
    out_ += c;
  }

  void quote(std::string_view s) {
    out_ += '"';
    for (char ch : s) {
      auto u = static_cast<unsigned char>(ch);
      switch (ch) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\r': out_ += "\\r"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (u < 0x20) {
            static const char* hex = "0123456789abcdef";
            out_ += "\\u00";
            out_ += hex[u >> 4];
            out_ += hex[u & 15];
          } else {
            out_ += ch;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  std::vector<Frame> stack_;
  bool after_key_ = false;
};

/// 6-decimal text of a single amount, rounded half-even.
inline std::string format_amount(double v) { return detail::micro_text(detail::round_micro(v)); }

namespace detail {

inline void write_node(JsonWriter& w, const CostBreakdown& b, const MicroTree& t) {
  w.begin_object();
  w.key("label").string(b.label);
  w.key("kind").string(to_string(b.kind));
  w.key("source_id").string(b.source_id);
  w.key("subtotal").raw(micro_text(t.subtotal));
  w.key("category_totals").begin_object();
  for (const auto& [c, v] : t.categories) w.key(to_string(c)).raw(micro_text(v));
  w.end_object();
  w.key("scrap_multiplier").number(b.scrap_multiplier_applied);
  w.key("children").begin_array();
  for (std::size_t i = 0; i < b.children.size(); ++i) {
    if (auto* n = std::get_if<CostBreakdown>(&b.children[i])) {
      write_node(w, *n, t.children[i]);
      continue;
    }
    const auto& li = std::get<LineItem>(b.children[i]);
    w.begin_object();
    w.key("label").string(li.label);
    w.key("source_id").string(li.source_id);
    w.key("category").string(to_string(li.category));
    w.key("amount").raw(micro_text(t.children[i].subtotal));
    w.key("quantity").number(li.quantity);
    w.key("context").string(describe(li.context));
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv_rows(std::string& out, const CostBreakdown& b, const MicroTree& t,
                           const std::string& path) {
  for (std::size_t i = 0; i < b.children.size(); ++i) {
    if (auto* n = std::get_if<CostBreakdown>(&b.children[i])) {
      write_csv_rows(out, *n, t.children[i], path + "/" + n->label);
      continue;
    }
    const auto& li = std::get<LineItem>(b.children[i]);
    out += csv_field(path + "/" + li.label);
    out += ',';
    out += to_string(li.category);
    out += ',';
    out += micro_text(t.children[i].subtotal);
    out += '\n';
  }
}

}  // namespace detail

enum class ReportFormat { json, csv };

inline void write_breakdown(JsonWriter& w, const CostBreakdown& b) {
  detail::write_node(w, b, detail::allocate(b));
}

/// json: nested tree; csv: header plus one row per leaf (path, category, amount).
inline std::string emit_breakdown(const CostBreakdown& b, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out = "path,category,amount\n";
    detail::write_csv_rows(out, b, detail::allocate(b), b.label);
    return out;
  }
  JsonWriter w;
  write_breakdown(w, b);
  return w.take();
}

namespace detail {

inline void write_delta(JsonWriter& w, const DeltaTree& d, const MicroTree& base,
                        const MicroTree& variant) {
  w.begin_object();
  w.key("label").string(d.label);
  w.key("base").raw(micro_text(base.subtotal));
  w.key("variant").raw(micro_text(variant.subtotal));
  w.key("delta").raw(micro_text(variant.subtotal - base.subtotal));
  if (d.relative_delta) {
    w.key("relative_delta").number(*d.relative_delta);
  } else {
    w.key("relative_delta").null();
  }
  if (!d.leaf) {
    w.key("children").begin_array();
    for (std::size_t i = 0; i < d.children.size(); ++i) {
      write_delta(w, d.children[i], base.children[i], variant.children[i]);
    }
    w.end_array();
  }
  w.end_object();
}

}  // namespace detail

/// Delta tree with base and variant apportioned separately, so serialized
/// deltas of the children add up to the serialized delta of the node.
inline void write_delta_tree(JsonWriter& w, const DeltaTree& d) {
  auto base = detail::allocate_delta(d, false, detail::round_micro(d.base_subtotal));
  auto variant = detail::allocate_delta(d, true, detail::round_micro(d.variant_subtotal));
  detail::write_delta(w, d, base, variant);
}

// ---------------------------------------------------------------------------
// Input files

using Json = nlohmann::json;

namespace detail {

inline const Json& member(const Json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::invalid_input, std::string("missing field '") + name + "'", where);
  }
  return j.at(name);
}

inline std::string get_identifier(const Json& j, const std::string& where) {
  if (!j.is_string()) throw Error(ErrorCode::invalid_input, "expected a string", where);
  std::string s = j.get<std::string>();
  if (!is_valid_identifier(s)) throw Error(ErrorCode::invalid_input, "invalid identifier '" + s + "'", where);
  return s;
}

inline double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorCode::invalid_input, "expected a number", where);
  double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::invalid_input, "number is not finite", where);
  return v;
}

inline ParamMap get_param_map(const Json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_input, "expected an object", where);
  ParamMap out;
  for (const auto& [k, v] : j.items()) {
    if (!is_valid_identifier(k)) throw Error(ErrorCode::invalid_input, "invalid parameter name '" + k + "'", where);
    out[k] = get_number(v, where + "." + k);
  }
  return out;
}

inline Json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::invalid_input, what + " is not valid JSON: " + e.what());
  }
}

}  // namespace detail

/// {"process": id, "material": id, "params": {name: number}}
inline PartSpec part_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw Error(ErrorCode::invalid_input, "part must be an object", "part");
  PartSpec p;
  p.process_id = get_identifier(member(j, "process", "part"), "part.process");
  p.material_id = get_identifier(member(j, "material", "part"), "part.material");
  if (j.contains("params")) p.params = get_param_map(j.at("params"), "part.params");
  return p;
}

/// {"id": id, "label": text?, "overrides": {name: number}?, "material": id?}
inline Scenario scenario_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw Error(ErrorCode::invalid_input, "scenario must be an object", "scenario");
  Scenario s;
  s.id = get_identifier(member(j, "id", "scenario"), "scenario.id");
  if (j.contains("label")) {
    if (!j.at("label").is_string()) throw Error(ErrorCode::invalid_input, "expected a string", "scenario.label");
    s.label = j.at("label").get<std::string>();
  }
  if (j.contains("overrides")) s.overrides = get_param_map(j.at("overrides"), "scenario.overrides");
  if (j.contains("material")) s.material_id = get_identifier(j.at("material"), "scenario.material");
  return s;
}

/// {"quantity": integer >= 1, "tooling_cost": number >= 0}
inline SeriesSpec series_from_json(const Json& j) {
  using namespace detail;
  SeriesSpec s;
  const Json& q = member(j, "quantity", "series");
  if (!q.is_number_integer() || q.get<long long>() < 1) {
    throw Error(ErrorCode::invalid_input, "quantity must be an integer >= 1", "series.quantity");
  }
  s.quantity = q.get<long long>();
  if (j.contains("tooling_cost")) s.tooling_cost = get_number(j.at("tooling_cost"), "series.tooling_cost");
  if (s.tooling_cost < 0) throw Error(ErrorCode::invalid_input, "tooling_cost must be >= 0", "series.tooling_cost");
  return s;
}

/// "QUANTITY:TOOLING", e.g. "2000:18000".
inline SeriesSpec parse_series_arg(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::invalid_input, "series must be QUANTITY:TOOLING");
  }
  SeriesSpec s;
  auto q = text.substr(0, colon);
  auto t = text.substr(colon + 1);
  auto [qp, qe] = std::from_chars(q.data(), q.data() + q.size(), s.quantity);
  auto [tp, te] = std::from_chars(t.data(), t.data() + t.size(), s.tooling_cost);
  if (qe != std::errc() || qp != q.data() + q.size() || te != std::errc() ||
      tp != t.data() + t.size() || q.empty() || t.empty()) {
    throw Error(ErrorCode::invalid_input, "series must be QUANTITY:TOOLING");
  }
  if (s.quantity < 1) throw Error(ErrorCode::invalid_input, "series quantity must be >= 1");
  if (!(s.tooling_cost >= 0) || !std::isfinite(s.tooling_cost)) {
    throw Error(ErrorCode::invalid_input, "tooling cost must be >= 0");
  }
  return s;
}

/// {"plant_id": id, "overrides": {name: number}}
inline RateTable rate_table_from_json(const Json& j) {
  using namespace detail;
  RateTable t;
  t.plant_id = get_identifier(member(j, "plant_id", "rates"), "rates.plant_id");
  if (j.contains("overrides")) t.overrides = get_param_map(j.at("overrides"), "rates.overrides");
  return t;
}

inline PartSpec parse_part(std::string_view text) {
  return part_from_json(detail::parse_json_text(text, "part"));
}
inline Scenario parse_scenario(std::string_view text) {
  return scenario_from_json(detail::parse_json_text(text, "scenario"));
}
inline SeriesSpec parse_series(std::string_view text) {
  return series_from_json(detail::parse_json_text(text, "series"));
}
inline RateTable parse_rate_table(std::string_view text) {
  return rate_table_from_json(detail::parse_json_text(text, "rate table"));
}

// ---------------------------------------------------------------------------
// Reports shared by the command line and the HTTP service

struct ComputeRequest {
  PartSpec part;
  std::optional<Scenario> scenario;
  std::optional<SeriesSpec> series;
  std::optional<double> target;
  std::optional<double> budget;
};

struct ComputeReport {
  std::string model_id;
  std::string currency;
  CostBreakdown breakdown;
  std::optional<SeriesSpec> series;
  std::optional<double> amortized_cost;
  std::optional<double> target;
  std::optional<double> cost_to_target_ratio;
  std::optional<double> budget;
  std::optional<double> budget_overrun_ratio;

  double total() const { return breakdown.subtotal; }
};

/// The target is compared with the amortized cost when a series is given,
/// with the direct cost otherwise. Budget spend is amortized cost × quantity
/// for a series, the direct cost of one part otherwise.
inline ComputeReport compute_report(const CostModel& model, const ComputeRequest& req) {
  ComputeReport r;
  r.model_id = model.id;
  r.currency = model.currency;
  r.breakdown = compute_part_cost(model, req.part, req.scenario ? &*req.scenario : nullptr);
  double cost = r.breakdown.subtotal;
  double spend = cost;
  if (req.series) {
    r.series = req.series;
    r.amortized_cost = amortize_series(cost, *req.series);
    cost = *r.amortized_cost;
    spend = cost * static_cast<double>(req.series->quantity);
  }
  if (req.target) {
    r.target = req.target;
    r.cost_to_target_ratio = target_indicator(cost, *req.target);
  }
  if (req.budget) {
    r.budget = req.budget;
    r.budget_overrun_ratio = budget_overrun_indicator(spend, *req.budget);
  }
  return r;
}

inline std::string report_json(const ComputeReport& r) {
  JsonWriter w;
  w.begin_object();
  w.key("model").string(r.model_id);
  w.key("currency").string(r.currency);
  w.key("total").raw(format_amount(r.total()));
  if (r.series) {
    w.key("series").begin_object();
    w.key("quantity").integer(r.series->quantity);
    w.key("tooling_cost").raw(format_amount(r.series->tooling_cost));
    w.key("amortized_cost_per_part").raw(format_amount(*r.amortized_cost));
    w.end_object();
  }
  if (r.target || r.budget) {
    w.key("indicators").begin_object();
    if (r.target) {
      w.key("target").raw(format_amount(*r.target));
      w.key("cost_to_target_ratio").raw(detail::format_ratio(*r.cost_to_target_ratio));
    }
    if (r.budget) {
      w.key("budget").raw(format_amount(*r.budget));
      w.key("budget_overrun_ratio").raw(detail::format_ratio(*r.budget_overrun_ratio));
    }
    w.end_object();
  }
  w.key("breakdown");
  write_breakdown(w, r.breakdown);
  w.end_object();
  return w.take();
}

/// CSV for a compute report: the breakdown rows only.
inline std::string report_csv(const ComputeReport& r) {
  return emit_breakdown(r.breakdown, ReportFormat::csv);
}

struct WhatIfResult {
  std::string model_id;
  CostBreakdown base;
  std::vector<Scenario> scenarios;
  std::vector<DeltaTree> deltas;
};

inline WhatIfResult whatif(const CostModel& model, const PartSpec& part,
                           const std::vector<Scenario>& scenarios) {
  WhatIfResult r;
  r.model_id = model.id;
  r.base = compute_part_cost(model, part);
  for (const auto& s : scenarios) {
    try {
      r.deltas.push_back(diff_breakdowns(r.base, compute_part_cost(model, part, &s)));
    } catch (Error& e) {
      e.prefix_location("scenario " + s.id);
      throw;
    }
    r.scenarios.push_back(s);
  }
  return r;
}

inline std::string whatif_json(const WhatIfResult& r) {
  JsonWriter w;
  w.begin_object();
  w.key("model").string(r.model_id);
  w.key("base_total").raw(format_amount(r.base.subtotal));
  w.key("scenarios").begin_array();
  for (std::size_t i = 0; i < r.scenarios.size(); ++i) {
    const auto& d = r.deltas[i];
    w.begin_object();
    w.key("id").string(r.scenarios[i].id);
    w.key("label").string(r.scenarios[i].label);
    w.key("total").raw(format_amount(d.variant_subtotal));
    w.key("delta").raw(detail::micro_text(detail::round_micro(d.variant_subtotal) -
                                          detail::round_micro(d.base_subtotal)));
    w.key("tree");
    write_delta_tree(w, d);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

inline std::string sweep_json(const std::string& model_id, const std::string& lever,
                              const std::vector<SweepRow>& rows) {
  JsonWriter w;
  w.begin_object();
  w.key("model").string(model_id);
  w.key("lever").string(lever);
  w.key("rows").begin_array();
  for (const auto& row : rows) {
    w.begin_object();
    w.key("value").number(row.value);
    w.key("total").raw(format_amount(row.total));
    if (row.target_ratio) {
      w.key("target_ratio").raw(detail::format_ratio(*row.target_ratio));
    } else {
      w.key("target_ratio").null();
    }
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

inline std::string benchmark_json(const std::string& model_id, const BenchmarkResult& r) {
  JsonWriter w;
  w.begin_object();
  w.key("model").string(model_id);
  w.key("plants").begin_array();
  for (const auto& row : r.rows) {
    w.begin_object();
    w.key("plant_id").string(row.plant_id);
    w.key("total").raw(format_amount(row.total));
    w.key("rank").integer(row.rank);
    w.end_object();
  }
  w.end_array();
  w.key("errors").begin_array();
  for (const auto& e : r.errors) {
    w.begin_object();
    w.key("plant_id").string(e.plant_id);
    w.key("code").string(to_string(e.code));
    w.key("message").string(e.message);
    if (!e.location.empty()) w.key("location").string(e.location);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

inline std::string error_json(const Error& e) {
  JsonWriter w;
  w.begin_object();
  w.key("code").string(to_string(e.code()));
  w.key("message").string(e.message());
  if (!e.location().empty()) w.key("location").string(e.location());
  w.end_object();
  return w.take();
}

inline void write_diagnostics(JsonWriter& w, const std::vector<Diagnostic>& diags) {
  w.begin_array();
  for (const auto& d : diags) {
    w.begin_object();
    w.key("severity").string(d.severity == Severity::error ? "error" : "warning");
    w.key("location").string(d.location);
    w.key("message").string(d.message);
    w.end_object();
  }
  w.end_array();
}

inline std::string diagnostics_json(const std::vector<Diagnostic>& diags) {
  JsonWriter w;
  write_diagnostics(w, diags);
  return w.take();
}

}  // namespace castcost
