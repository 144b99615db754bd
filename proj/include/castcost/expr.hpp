#pragma once

// Arithmetic formula language shared by every cost formula in a model.
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'
//
// Built-in calls: min/2, max/2, ceil/1, floor/1, abs/1. There are no
// comparisons or conditionals; threshold logic is written with min/max.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "castcost/error.hpp"

namespace castcost {

enum class BinaryOp : char { add = '+', sub = '-', mul = '*', div = '/' };

enum class Builtin { min, max, ceil, floor, abs };

inline std::string_view builtin_name(Builtin fn) {
  switch (fn) {
    case Builtin::min: return "min";
    case Builtin::max: return "max";
    case Builtin::ceil: return "ceil";
    case Builtin::floor: return "floor";
    case Builtin::abs: return "abs";
  }
  return "?";
}

inline std::size_t builtin_arity(Builtin fn) {
  return (fn == Builtin::min || fn == Builtin::max) ? 2 : 1;
}

inline std::optional<Builtin> find_builtin(std::string_view name) {
  for (Builtin fn : {Builtin::min, Builtin::max, Builtin::ceil, Builtin::floor, Builtin::abs}) {
    if (builtin_name(fn) == name) return fn;
  }
  return std::nullopt;
}

struct ExprNode;

/// Immutable expression tree. Copies share structure, so an Expr can be handed
/// to any number of threads without synchronization.
class Expr {
 public:
  static Expr number(double value);
  static Expr variable(std::string name);
  static Expr negate(Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr call(Builtin fn, std::vector<Expr> args);

  const ExprNode& node() const { return *node_; }

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

struct NumberNode {
  double value;
};
struct VariableNode {
  std::string name;
};
struct NegateNode {
  Expr operand;
};
struct BinaryNode {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};
struct CallNode {
  Builtin fn;
  std::vector<Expr> args;
};

struct ExprNode {
  std::variant<NumberNode, VariableNode, NegateNode, BinaryNode, CallNode> value;
};

inline Expr Expr::number(double value) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{NumberNode{value}}));
}
inline Expr Expr::variable(std::string name) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{VariableNode{std::move(name)}}));
}
inline Expr Expr::negate(Expr operand) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{NegateNode{std::move(operand)}}));
}
inline Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Expr(
      std::make_shared<const ExprNode>(ExprNode{BinaryNode{op, std::move(lhs), std::move(rhs)}}));
}
inline Expr Expr::call(Builtin fn, std::vector<Expr> args) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{CallNode{fn, std::move(args)}}));
}

inline bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = a.node().value;
  const auto& y = b.node().value;
  if (x.index() != y.index()) return false;
  if (auto* n = std::get_if<NumberNode>(&x)) return n->value == std::get<NumberNode>(y).value;
  if (auto* v = std::get_if<VariableNode>(&x)) return v->name == std::get<VariableNode>(y).name;
  if (auto* g = std::get_if<NegateNode>(&x)) return g->operand == std::get<NegateNode>(y).operand;
  if (auto* bx = std::get_if<BinaryNode>(&x)) {
    const auto& by = std::get<BinaryNode>(y);
    return bx->op == by.op && bx->lhs == by.lhs && bx->rhs == by.rhs;
  }
  const auto& cx = std::get<CallNode>(x);
  const auto& cy = std::get<CallNode>(y);
  return cx.fn == cy.fn && cx.args == cy.args;
}

inline bool is_identifier_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_identifier_char(char c) {
  return is_identifier_start(c) || (c >= '0' && c <= '9');
}
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline bool is_valid_identifier(std::string_view s) {
  if (s.empty() || !is_identifier_start(s.front())) return false;
  for (char c : s) {
    if (!is_identifier_char(c)) return false;
  }
  return true;
}

/// Scans a decimal literal at `pos`: digits ('.' digits)? ([eE] [+-]? digits)?
/// Returns the length consumed, or 0 if no literal starts there.
inline std::size_t scan_number(std::string_view text, std::size_t pos) {
  std::size_t i = pos;
  if (i >= text.size() || !is_digit(text[i])) return 0;
  while (i < text.size() && is_digit(text[i])) ++i;
  if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
    ++i;
    while (i < text.size() && is_digit(text[i])) ++i;
  }
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
    if (j < text.size() && is_digit(text[j])) {
      while (j < text.size() && is_digit(text[j])) ++j;
      i = j;
    }
  }
  return i - pos;
}

/// Converts a scanned literal; nullopt if it overflows to infinity.
inline std::optional<double> literal_value(std::string_view literal) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
  if (ec == std::errc::result_out_of_range) {
    // Underflow rounds toward zero and is accepted; overflow is not finite.
    bool has_negative_exponent = literal.find("e-") != std::string_view::npos ||
                                 literal.find("E-") != std::string_view::npos;
    if (has_negative_exponent) return 0.0;
    return std::nullopt;
  }
  if (ec != std::errc() || ptr != literal.data() + literal.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expr parse() {
    skip_space();
    if (pos_ >= text_.size()) fail({"expression"}, "empty expression");
    Expr e = parse_expr();
    skip_space();
    if (pos_ < text_.size()) fail({"operator", "end of input"}, "unexpected trailing input");
    return e;
  }

 private:
  static constexpr int kMaxDepth = 200;

  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& what) const {
    std::string msg = what + " at offset " + std::to_string(pos_) + ", expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += " or ";
      msg += expected[i];
    }
    throw SyntaxError(pos_, std::move(expected), msg);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(BinaryOp::add, std::move(lhs), parse_term());
      } else if (accept('-')) {
        lhs = Expr::binary(BinaryOp::sub, std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(BinaryOp::mul, std::move(lhs), parse_factor());
      } else if (accept('/')) {
        lhs = Expr::binary(BinaryOp::div, std::move(lhs), parse_factor());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_factor() {
    if (++depth_ > kMaxDepth) fail({"shallower nesting"}, "expression nested too deeply");
    Expr e = parse_factor_inner();
    --depth_;
    return e;
  }

  Expr parse_factor_inner() {
    skip_space();
    if (pos_ >= text_.size()) fail({"number", "identifier", "'('", "'-'"}, "unexpected end");
    char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      return Expr::negate(parse_factor());
    }
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      if (!accept(')')) fail({"')'"}, "unbalanced parenthesis");
      return inner;
    }
    if (is_digit(c)) {
      std::size_t len = scan_number(text_, pos_);
      auto value = literal_value(text_.substr(pos_, len));
      if (!value) fail({"finite number"}, "number literal out of range");
      pos_ += len;
      if (pos_ < text_.size() && is_identifier_start(text_[pos_])) {
        fail({"operator"}, "unit suffixes are not allowed in expressions");
      }
      return Expr::number(*value);
    }
    if (is_identifier_start(c)) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && is_identifier_char(text_[pos_])) ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      std::size_t after_name = pos_;
      if (!accept('(')) {
        pos_ = after_name;
        return Expr::variable(std::move(name));
      }
      auto fn = find_builtin(name);
      if (!fn) {
        pos_ = start;
        fail({"min", "max", "ceil", "floor", "abs"}, "unknown function '" + name + "'");
      }
      std::vector<Expr> args;
      args.push_back(parse_expr());
      while (accept(',')) args.push_back(parse_expr());
      if (!accept(')')) fail({"','", "')'"}, "unterminated call");
      if (args.size() != builtin_arity(*fn)) {
        pos_ = start;
        fail({std::to_string(builtin_arity(*fn)) + " argument(s)"},
             "wrong number of arguments to " + name);
      }
      return Expr::call(*fn, std::move(args));
    }
    fail({"number", "identifier", "'('", "'-'"}, std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

inline void append_number(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

inline int precedence(const Expr& e) {
  if (auto* b = std::get_if<BinaryNode>(&e.node().value)) {
    return (b->op == BinaryOp::add || b->op == BinaryOp::sub) ? 1 : 2;
  }
  if (auto* n = std::get_if<NumberNode>(&e.node().value); n && std::signbit(n->value)) return 3;
  return 4;
}

inline void format_into(std::string& out, const Expr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberNode>) {
          append_number(out, n.value);
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, NegateNode>) {
          out += '-';
          bool wrap = precedence(n.operand) < 3;
          if (wrap) out += '(';
          format_into(out, n.operand);
          if (wrap) out += ')';
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          int p = (n.op == BinaryOp::add || n.op == BinaryOp::sub) ? 1 : 2;
          bool wrap_lhs = precedence(n.lhs) < p;
          bool wrap_rhs = precedence(n.rhs) <= p;
          if (wrap_lhs) out += '(';
          format_into(out, n.lhs);
          if (wrap_lhs) out += ')';
          out += ' ';
          out += static_cast<char>(n.op);
          out += ' ';
          if (wrap_rhs) out += '(';
          format_into(out, n.rhs);
          if (wrap_rhs) out += ')';
        } else {
          out += builtin_name(n.fn);
          out += '(';
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            format_into(out, n.args[i]);
          }
          out += ')';
        }
      },
      e.node().value);
}

inline void collect_variables(const Expr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VariableNode>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, NegateNode>) {
          collect_variables(n.operand, out);
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          collect_variables(n.lhs, out);
          collect_variables(n.rhs, out);
        } else if constexpr (std::is_same_v<T, CallNode>) {
          for (const auto& a : n.args) collect_variables(a, out);
        }
      },
      e.node().value);
}

inline double checked(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::non_finite_result, "non-finite intermediate result");
  return value;
}

}  // namespace detail

/// Parses formula text. Throws SyntaxError with the byte offset of the failure.
inline Expr parse_expr(std::string_view text) { return detail::ExprParser(text).parse(); }

/// Canonical text: single spaces around binary operators, minimal parentheses
/// that preserve the tree shape exactly.
inline std::string format_expr(const Expr& e) {
  std::string out;
  detail::format_into(out, e);
  return out;
}

inline std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  detail::collect_variables(e, out);
  return out;
}

inline bool contains_negation(const Expr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberNode>) {
          return std::signbit(n.value);
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          return false;
        } else if constexpr (std::is_same_v<T, NegateNode>) {
          return true;
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          return contains_negation(n.lhs) || contains_negation(n.rhs);
        } else {
          for (const auto& a : n.args) {
            if (contains_negation(a)) return true;
          }
          return false;
        }
      },
      e.node().value);
}

/// Evaluates `e`, calling `lookup(name)` for each variable occurrence. The
/// lookup is expected to throw when a name cannot be bound.
template <class Lookup>
double evaluate(const Expr& e, Lookup&& lookup) {
  using detail::checked;
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberNode>) {
          return checked(n.value);
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          return checked(lookup(std::string_view(n.name)));
        } else if constexpr (std::is_same_v<T, NegateNode>) {
          return -evaluate(n.operand, lookup);
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          double a = evaluate(n.lhs, lookup);
          double b = evaluate(n.rhs, lookup);
          switch (n.op) {
            case BinaryOp::add: return checked(a + b);
            case BinaryOp::sub: return checked(a - b);
            case BinaryOp::mul: return checked(a * b);
            case BinaryOp::div:
              if (b == 0.0) throw Error(ErrorCode::division_by_zero, "division by zero");
              return checked(a / b);
          }
          return 0.0;
        } else {
          double a = evaluate(n.args[0], lookup);
          switch (n.fn) {
            case Builtin::min: return std::min(a, evaluate(n.args[1], lookup));
            case Builtin::max: return std::max(a, evaluate(n.args[1], lookup));
            case Builtin::ceil: return std::ceil(a);
            case Builtin::floor: return std::floor(a);
            case Builtin::abs: return std::fabs(a);
          }
          return 0.0;
        }
      },
      e.node().value);
}

using Environment = std::map<std::string, double, std::less<>>;

inline double eval_expr(const Expr& e, const Environment& env) {
  return evaluate(e, [&](std::string_view name) -> double {
    auto it = env.find(name);
    if (it == env.end()) {
      throw Error(ErrorCode::unbound_variable, "unbound variable '" + std::string(name) + "'");
    }
    return it->second;
  });
}

}  // namespace castcost
