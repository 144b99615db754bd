#pragma once

// Text format for cost models (*.cmdl).
//
//   model "foundry" {
//     currency = "eur";
//     param sand_price_eur_per_kg = 0.06 eur_per_kg;   # global scope
//     input part_mass_kg kg;                           # bound by every part spec
//     process melting { param furnace_rate_per_h = 180 eur_per_h; }
//     material ge240 { param density_kg_per_dm3 = 7.85 kg_per_dm3; }
//     entity abrasives { driver = part_mass_kg; formula = "part_mass_kg * 0.1"; category = consumable; }
//     component sand { kind = purchased; quantity_per_output = "12"; unit_cost = "sand_price_eur_per_kg"; material_yield = 1; }
//     operation pouring { process = melting; cycle_time_s = 90; ...; param local = 2; }
//     assembly coulee { components = [sand]; operations = [pouring]; }
//     root = coulee;
//   }
//
// Comments run from '#' to end of line.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "castcost/error.hpp"
#include "castcost/expr.hpp"
#include "castcost/model.hpp"
#include "castcost/validate.hpp"

namespace castcost {

struct SourceLocation {
  std::size_t line = 0;
  std::size_t column = 0;
};

struct ModelDocument {
  std::string text;
  CostModel model;
  /// Declaration keys ("component:mold", "component:mold.unit_cost",
  /// "global.x", "process:p.x", "model.root") to their source position.
  std::map<std::string, SourceLocation> locations;
  /// Problems found while reading: duplicate ids, unknown keys, malformed
  /// formulas. Structural syntax errors throw instead.
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

enum class TokenKind { identifier, number, string, punct, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;
  double number = 0.0;
  std::size_t offset = 0;
  std::size_t line = 1;
  std::size_t column = 1;
  /// For strings: source position of the first character after the quote.
  std::size_t content_offset = 0;
};

class ModelLexer {
 public:
  explicit ModelLexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_trivia();
    Token t;
    t.offset = pos_;
    t.line = line_;
    t.column = pos_ - line_start_ + 1;
    if (pos_ >= text_.size()) return t;
    char c = text_[pos_];
    if (is_identifier_start(c)) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && is_identifier_char(text_[pos_])) ++pos_;
      t.kind = TokenKind::identifier;
      t.text = std::string(text_.substr(start, pos_ - start));
      return t;
    }
    if (is_digit(c)) {
      std::size_t len = scan_number(text_, pos_);
      auto v = literal_value(text_.substr(pos_, len));
      if (!v) fail(t, {"finite number"}, "number literal out of range");
      t.kind = TokenKind::number;
      t.text = std::string(text_.substr(pos_, len));
      t.number = *v;
      pos_ += len;
      return t;
    }
    if (c == '"') {
      ++pos_;
      t.kind = TokenKind::string;
      t.content_offset = pos_;
      for (;;) {
        if (pos_ >= text_.size() || text_[pos_] == '\n') fail(t, {"'\"'"}, "unterminated string");
        char d = text_[pos_++];
        if (d == '"') break;
        if (d == '\\') {
          if (pos_ >= text_.size()) fail(t, {"escape"}, "unterminated string");
          char e = text_[pos_++];
          switch (e) {
            case 'n': t.text += '\n'; break;
            case 't': t.text += '\t'; break;
            case '"': t.text += '"'; break;
            case '\\': t.text += '\\'; break;
            default: fail(t, {"\\n", "\\t", "\\\"", "\\\\"}, "unknown escape");
          }
          continue;
        }
        t.text += d;
      }
      return t;
    }
    if (std::string_view("{}[]=;,-").find(c) != std::string_view::npos) {
      ++pos_;
      t.kind = TokenKind::punct;
      t.text = std::string(1, c);
      return t;
    }
    fail(t, {"token"}, std::string("unexpected character '") + c + "'");
  }

  [[noreturn]] static void fail(const Token& at, std::vector<std::string> expected,
                                const std::string& what) {
    std::string msg = std::to_string(at.line) + ":" + std::to_string(at.column) + ": " + what;
    if (!expected.empty()) {
      msg += ", expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += " or ";
        msg += expected[i];
      }
    }
    throw SyntaxError(at.offset, std::move(expected), msg, at.line, at.column);
  }

  /// Line/column of an arbitrary byte offset (strings may span no newlines).
  std::pair<std::size_t, std::size_t> position_of(std::size_t offset) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return {line, col};
  }

 private:
  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++pos_;
        ++line_;
        line_start_ = pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) : lexer_(text), text_(text) { advance(); }

  ModelDocument parse() {
    doc_.text = std::string(lexer_text());
    if (tok_.kind == TokenKind::end) ModelLexer::fail(tok_, {"model"}, "expected model");
    expect_keyword("model");
    if (tok_.kind != TokenKind::string) ModelLexer::fail(tok_, {"model name string"}, "bad header");
    doc_.model.id = tok_.text;
    remember("model", tok_);
    advance();
    expect_punct("{");
    while (!is_punct("}")) {
      if (tok_.kind == TokenKind::end) ModelLexer::fail(tok_, {"'}'"}, "unexpected end of input");
      parse_item();
    }
    advance();
    if (tok_.kind != TokenKind::end) ModelLexer::fail(tok_, {"end of input"}, "trailing input");
    return std::move(doc_);
  }

 private:
  struct Value {
    enum Kind { num, str, ident, list } kind = num;
    double number = 0.0;
    std::string text;
    std::vector<std::string> items;
    Token at;
  };

  std::string_view lexer_text() const { return text_; }

  void advance() { tok_ = lexer_.next(); }

  bool is_punct(std::string_view p) const { return tok_.kind == TokenKind::punct && tok_.text == p; }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) ModelLexer::fail(tok_, {"'" + std::string(p) + "'"}, "unexpected token");
    advance();
  }

  void expect_keyword(std::string_view k) {
    if (tok_.kind != TokenKind::identifier || tok_.text != k) {
      ModelLexer::fail(tok_, {std::string(k)}, "unexpected token");
    }
    advance();
  }

  std::string expect_identifier(std::string_view what) {
    if (tok_.kind != TokenKind::identifier) {
      ModelLexer::fail(tok_, {std::string(what)}, "expected identifier");
    }
    std::string s = tok_.text;
    advance();
    return s;
  }

  void remember(const std::string& key, const Token& at) {
    if (!shadow_) doc_.locations.emplace(key, SourceLocation{at.line, at.column});
  }

  // While reading the body of a duplicated declaration nothing is recorded.
  bool begin_declaration(const std::string& key, const std::string& what, const Token& at) {
    shadow_ = duplicate(key, what, at);
    return !shadow_;
  }

  bool end_declaration(const std::string& key, const Token& at) {
    bool keep = !shadow_;
    shadow_ = false;
    if (keep) remember(key, at);
    return keep;
  }

  std::string where(const Token& at) const {
    return std::to_string(at.line) + ":" + std::to_string(at.column);
  }

  void diag(std::string loc, std::string msg, const Token& at) {
    doc_.diagnostics.push_back({Severity::error, std::move(loc), msg + " at " + where(at)});
  }

  /// True if `key` was already declared; records a diagnostic naming both sites.
  bool duplicate(const std::string& key, const std::string& what, const Token& at) {
    if (shadow_) return false;
    auto it = doc_.locations.find(key);
    if (it == doc_.locations.end()) return false;
    doc_.diagnostics.push_back(
        {Severity::error, key,
         "duplicate " + what + " (first at " + std::to_string(it->second.line) + ":" +
             std::to_string(it->second.column) + ", again at " + where(at) + ")"});
    return true;
  }

  Value parse_value() {
    Value v;
    v.at = tok_;
    if (is_punct("-")) {
      advance();
      if (tok_.kind != TokenKind::number) ModelLexer::fail(tok_, {"number"}, "expected number");
      v.kind = Value::num;
      v.number = -tok_.number;
      advance();
      return v;
    }
    if (is_punct("[")) {
      advance();
      v.kind = Value::list;
      if (!is_punct("]")) {
        v.items.push_back(expect_identifier("identifier"));
        while (is_punct(",")) {
          advance();
          v.items.push_back(expect_identifier("identifier"));
        }
      }
      expect_punct("]");
      return v;
    }
    switch (tok_.kind) {
      case TokenKind::number:
        v.kind = Value::num;
        v.number = tok_.number;
        break;
      case TokenKind::string:
        v.kind = Value::str;
        v.text = tok_.text;
        break;
      case TokenKind::identifier:
        v.kind = Value::ident;
        v.text = tok_.text;
        break;
      default:
        ModelLexer::fail(tok_, {"number", "string", "identifier", "list"}, "expected value");
    }
    advance();
    return v;
  }

  std::optional<Expr> to_expr(const Value& v, const std::string& loc) {
    if (v.kind == Value::num) return Expr::number(v.number);
    if (v.kind != Value::str) {
      diag(loc, "expected a number or a quoted formula", v.at);
      return std::nullopt;
    }
    try {
      return parse_expr(v.text);
    } catch (const SyntaxError& e) {
      auto [line, col] = lexer_.position_of(v.at.content_offset + e.position());
      doc_.diagnostics.push_back({Severity::error, loc,
                                  "malformed formula: " + e.message() + " at " +
                                      std::to_string(line) + ":" + std::to_string(col)});
      return std::nullopt;
    }
  }

  std::optional<std::string> to_identifier(const Value& v, const std::string& loc) {
    if (v.kind == Value::ident) return v.text;
    diag(loc, "expected an identifier", v.at);
    return std::nullopt;
  }

  std::optional<std::string> to_text(const Value& v, const std::string& loc) {
    if (v.kind == Value::str || v.kind == Value::ident) return v.text;
    diag(loc, "expected a string", v.at);
    return std::nullopt;
  }

  std::optional<std::vector<std::string>> to_list(const Value& v, const std::string& loc) {
    if (v.kind == Value::list) return v.items;
    diag(loc, "expected a list [a, b, ...]", v.at);
    return std::nullopt;
  }

  // 'param' already consumed.
  void parse_param(Scope& scope, const std::string& owner_key) {
    Token at = tok_;
    std::string name = expect_identifier("parameter name");
    expect_punct("=");
    Value v = parse_value();
    std::string unit;
    if (tok_.kind == TokenKind::identifier) unit = expect_identifier("unit");
    expect_punct(";");
    std::string key = owner_key + "." + name;
    if (duplicate(key, "parameter " + name, at)) return;
    remember(key, at);
    Parameter p;
    p.name = name;
    p.unit = unit;
    if (v.kind == Value::num) {
      p.value = v.number;
    } else if (auto e = to_expr(v, key)) {
      p.value = *e;
    } else {
      return;
    }
    scope.push_back(std::move(p));
  }

  void parse_param_block(Scope& scope, const std::string& key) {
    expect_punct("{");
    while (!is_punct("}")) {
      expect_keyword("param");
      parse_param(scope, key);
    }
    advance();
  }

  template <class Handler>
  void parse_kv_block(const std::string& key, Handler&& on_key, Scope* params = nullptr) {
    expect_punct("{");
    while (!is_punct("}")) {
      if (params && tok_.kind == TokenKind::identifier && tok_.text == "param") {
        advance();
        parse_param(*params, key);
        continue;
      }
      Token at = tok_;
      std::string name = expect_identifier("key");
      expect_punct("=");
      Value v = parse_value();
      expect_punct(";");
      std::string field_key = key + "." + name;
      if (duplicate(field_key, "key " + name, at)) continue;
      remember(field_key, at);
      if (!on_key(name, v, field_key)) diag(field_key, "unknown key '" + name + "'", at);
    }
    advance();
  }

  void parse_item() {
    Token at = tok_;
    std::string kw = expect_identifier("declaration");
    CostModel& m = doc_.model;
    if (kw == "param") {
      parse_param(m.globals, "global");
    } else if (kw == "input") {
      Token name_at = tok_;
      std::string name = expect_identifier("input name");
      std::string unit;
      if (tok_.kind == TokenKind::identifier) unit = expect_identifier("unit");
      expect_punct(";");
      std::string key = "input:" + name;
      if (!duplicate(key, "input " + name, name_at)) {
        remember(key, name_at);
        m.inputs.push_back({name, unit});
      }
    } else if (kw == "currency") {
      expect_punct("=");
      Value v = parse_value();
      expect_punct(";");
      remember("model.currency", at);
      if (auto s = to_text(v, "model.currency")) m.currency = *s;
    } else if (kw == "root") {
      expect_punct("=");
      Value v = parse_value();
      expect_punct(";");
      if (duplicate("model.root", "root", at)) return;
      remember("model.root", at);
      if (auto s = to_identifier(v, "model.root")) m.root_assembly = *s;
    } else if (kw == "process" || kw == "material") {
      std::string id = expect_identifier(kw + " id");
      std::string key = kw + ":" + id;
      ScopeOwner owner{id, {}};
      begin_declaration(key, kw + " id " + id, at);
      parse_param_block(owner.params, key);
      if (!end_declaration(key, at)) return;
      (kw == "process" ? m.processes : m.materials).push_back(std::move(owner));
    } else if (kw == "entity") {
      parse_entity(at);
    } else if (kw == "component") {
      parse_component(at);
    } else if (kw == "operation") {
      parse_operation(at);
    } else if (kw == "assembly") {
      parse_assembly(at);
    } else {
      ModelLexer::fail(at,
                       {"param", "input", "currency", "root", "process", "material", "entity",
                        "component", "operation", "assembly"},
                       "unknown declaration '" + kw + "'");
    }
  }

  void parse_entity(const Token& at) {
    CostEntity e;
    e.id = expect_identifier("entity id");
    std::string key = "entity:" + e.id;
    begin_declaration(key, "entity id " + e.id, at);
    parse_kv_block(key, [&](const std::string& k, const Value& v, const std::string& fk) {
      if (k == "driver") {
        if (auto s = to_identifier(v, fk)) e.driver = *s;
      } else if (k == "formula") {
        e.formula = to_expr(v, fk);
      } else if (k == "category") {
        if (auto s = to_identifier(v, fk)) {
          if (auto c = parse_category(*s)) {
            e.category = *c;
          } else {
            diag(fk, "unknown category '" + *s + "'", v.at);
          }
        }
      } else {
        return false;
      }
      return true;
    });
    if (!end_declaration(key, at)) return;
    doc_.model.entities.push_back(std::move(e));
  }

  void parse_component(const Token& at) {
    Component c;
    c.id = expect_identifier("component id");
    std::string key = "component:" + c.id;
    begin_declaration(key, "component id " + c.id, at);
    parse_kv_block(key, [&](const std::string& k, const Value& v, const std::string& fk) {
      if (k == "name") {
        if (auto s = to_text(v, fk)) c.name = *s;
      } else if (k == "kind") {
        if (auto s = to_identifier(v, fk)) {
          if (*s == "purchased") {
            c.kind = ComponentKind::purchased;
          } else if (*s == "produced") {
            c.kind = ComponentKind::produced;
          } else {
            diag(fk, "kind must be purchased or produced", v.at);
          }
        }
      } else if (k == "quantity_per_output") {
        c.quantity_per_output = to_expr(v, fk);
      } else if (k == "unit_cost") {
        c.unit_cost = to_expr(v, fk);
      } else if (k == "sub_assembly") {
        c.sub_assembly = to_identifier(v, fk);
      } else if (k == "material_yield") {
        c.material_yield = to_expr(v, fk);
      } else if (k == "entity") {
        c.entity = to_identifier(v, fk);
      } else {
        return false;
      }
      return true;
    });
    if (!end_declaration(key, at)) return;
    doc_.model.components.push_back(std::move(c));
  }

  void parse_operation(const Token& at) {
    Operation op;
    op.id = expect_identifier("operation id");
    std::string key = "operation:" + op.id;
    begin_declaration(key, "operation id " + op.id, at);
    parse_kv_block(
        key,
        [&](const std::string& k, const Value& v, const std::string& fk) {
          if (k == "name") {
            if (auto s = to_text(v, fk)) op.name = *s;
          } else if (k == "process") {
            if (auto s = to_identifier(v, fk)) op.process_id = *s;
          } else if (k == "material") {
            op.material_id = to_identifier(v, fk);
          } else if (k == "cycle_time_s") {
            op.cycle_time_s = to_expr(v, fk);
          } else if (k == "parts_per_cycle") {
            op.parts_per_cycle = to_expr(v, fk);
          } else if (k == "machine_rate_per_h") {
            op.machine_rate_per_h = to_expr(v, fk);
          } else if (k == "labor_rate_per_h") {
            op.labor_rate_per_h = to_expr(v, fk);
          } else if (k == "crew_size") {
            op.crew_size = to_expr(v, fk);
          } else if (k == "scrap_rate") {
            op.scrap_rate = to_expr(v, fk);
          } else if (k == "consumable_cost_per_part") {
            op.consumable_cost_per_part = to_expr(v, fk);
          } else if (k == "entities") {
            if (auto l = to_list(v, fk)) op.entities = *l;
          } else {
            return false;
          }
          return true;
        },
        &op.params);
    if (!end_declaration(key, at)) return;
    doc_.model.operations.push_back(std::move(op));
  }

  void parse_assembly(const Token& at) {
    Assembly a;
    a.id = expect_identifier("assembly id");
    std::string key = "assembly:" + a.id;
    begin_declaration(key, "assembly id " + a.id, at);
    parse_kv_block(key, [&](const std::string& k, const Value& v, const std::string& fk) {
      if (k == "name") {
        if (auto s = to_text(v, fk)) a.name = *s;
      } else if (k == "output") {
        if (auto s = to_text(v, fk)) a.output_name = *s;
      } else if (k == "components") {
        if (auto l = to_list(v, fk)) a.components = *l;
      } else if (k == "operations") {
        if (auto l = to_list(v, fk)) a.operations = *l;
      } else {
        return false;
      }
      return true;
    });
    if (!end_declaration(key, at)) return;
    doc_.model.assemblies.push_back(std::move(a));
  }

  ModelLexer lexer_;
  Token tok_;
  bool shadow_ = false;
  std::string_view text_;
  ModelDocument doc_;
};

inline void print_string(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
}

inline void print_expr_value(std::string& out, const Expr& e) {
  if (auto* n = std::get_if<NumberNode>(&e.node().value)) {
    append_number(out, n->value);
    return;
  }
  print_string(out, format_expr(e));
}

inline void print_params(std::string& out, const Scope& scope, std::string_view indent) {
  for (const auto& p : scope) {
    out += indent;
    out += "param " + p.name + " = ";
    if (const double* v = std::get_if<double>(&p.value)) {
      append_number(out, *v);
    } else {
      print_string(out, format_expr(std::get<Expr>(p.value)));
    }
    if (!p.unit.empty()) out += " " + p.unit;
    out += ";\n";
  }
}

inline void print_field(std::string& out, std::string_view key, const std::optional<Expr>& e) {
  if (!e) return;
  out += "    ";
  out += key;
  out += " = ";
  print_expr_value(out, *e);
  out += ";\n";
}

inline void print_list(std::string& out, std::string_view key, const std::vector<std::string>& l) {
  out += "    ";
  out += key;
  out += " = [";
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) out += ", ";
    out += l[i];
  }
  out += "];\n";
}

}  // namespace detail

/// Reads a model document. Throws SyntaxError (with line/column) on malformed
/// structure; recoverable problems land in `diagnostics`.
inline ModelDocument parse_model(std::string_view text) {
  return detail::ModelParser(text).parse();
}

/// Canonical text of a model. Comments and original layout are not preserved.
inline std::string print_model(const CostModel& m) {
  using namespace detail;
  std::string out = "model ";
  print_string(out, m.id);
  out += " {\n";
  out += "  currency = ";
  print_string(out, m.currency);
  out += ";\n";
  if (!m.globals.empty()) {
    out += "\n";
    print_params(out, m.globals, "  ");
  }
  if (!m.inputs.empty()) {
    out += "\n";
    for (const auto& in : m.inputs) {
      out += "  input " + in.name;
      if (!in.unit.empty()) out += " " + in.unit;
      out += ";\n";
    }
  }
  auto owners = [&](const std::vector<ScopeOwner>& list, std::string_view kw) {
    for (const auto& o : list) {
      out += "\n  ";
      out += kw;
      out += " " + o.id + " {\n";
      print_params(out, o.params, "    ");
      out += "  }\n";
    }
  };
  owners(m.processes, "process");
  owners(m.materials, "material");
  for (const auto& e : m.entities) {
    out += "\n  entity " + e.id + " {\n";
    out += "    driver = " + e.driver + ";\n";
    print_field(out, "formula", e.formula);
    out += "    category = ";
    out += to_string(e.category);
    out += ";\n  }\n";
  }
  for (const auto& c : m.components) {
    out += "\n  component " + c.id + " {\n";
    if (!c.name.empty()) {
      out += "    name = ";
      print_string(out, c.name);
      out += ";\n";
    }
    out += c.kind == ComponentKind::purchased ? "    kind = purchased;\n" : "    kind = produced;\n";
    print_field(out, "quantity_per_output", c.quantity_per_output);
    print_field(out, "unit_cost", c.unit_cost);
    if (c.sub_assembly) out += "    sub_assembly = " + *c.sub_assembly + ";\n";
    print_field(out, "material_yield", c.material_yield);
    if (c.entity) out += "    entity = " + *c.entity + ";\n";
    out += "  }\n";
  }
  for (const auto& op : m.operations) {
    out += "\n  operation " + op.id + " {\n";
    if (!op.name.empty()) {
      out += "    name = ";
      print_string(out, op.name);
      out += ";\n";
    }
    out += "    process = " + op.process_id + ";\n";
    if (op.material_id) out += "    material = " + *op.material_id + ";\n";
    print_field(out, "cycle_time_s", op.cycle_time_s);
    print_field(out, "parts_per_cycle", op.parts_per_cycle);
    print_field(out, "machine_rate_per_h", op.machine_rate_per_h);
    print_field(out, "labor_rate_per_h", op.labor_rate_per_h);
    print_field(out, "crew_size", op.crew_size);
    print_field(out, "scrap_rate", op.scrap_rate);
    print_field(out, "consumable_cost_per_part", op.consumable_cost_per_part);
    if (!op.entities.empty()) print_list(out, "entities", op.entities);
    print_params(out, op.params, "    ");
    out += "  }\n";
  }
  for (const auto& a : m.assemblies) {
    out += "\n  assembly " + a.id + " {\n";
    if (!a.name.empty()) {
      out += "    name = ";
      print_string(out, a.name);
      out += ";\n";
    }
    if (!a.output_name.empty()) {
      out += "    output = ";
      print_string(out, a.output_name);
      out += ";\n";
    }
    print_list(out, "components", a.components);
    print_list(out, "operations", a.operations);
    out += "  }\n";
  }
  if (!m.root_assembly.empty()) out += "\n  root = " + m.root_assembly + ";\n";
  out += "}\n";
  return out;
}

inline std::string print_model(const ModelDocument& doc) { return print_model(doc.model); }

/// Reader diagnostics followed by validator diagnostics, with source
/// positions appended where the declaration is known.
inline std::vector<Diagnostic> check_document(const ModelDocument& doc) {
  std::vector<Diagnostic> out = doc.diagnostics;
  for (auto d : validate_model(doc.model)) {
    std::string key = d.location;
    while (!key.empty()) {
      if (auto it = doc.locations.find(key); it != doc.locations.end()) {
        d.message += " (" + std::to_string(it->second.line) + ":" +
                     std::to_string(it->second.column) + ")";
        break;
      }
      auto dot = key.rfind('.');
      if (dot == std::string::npos) break;
      key.resize(dot);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace castcost
