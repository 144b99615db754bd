#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace castcost {

enum class ErrorCode {
  syntax_error,
  unbound_variable,
  division_by_zero,
  non_finite_result,
  unresolved_parameter,
  cyclic_parameter,
  yield_out_of_range,
  parts_per_cycle_out_of_range,
  scrap_rate_out_of_range,
  non_positive_target,
  non_positive_budget,
  unknown_override,
  shape_mismatch,
  unknown_context,
  missing_input,
  invalid_input,
  invalid_model,
  unknown_model,
  io_error,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::syntax_error: return "syntax_error";
    case ErrorCode::unbound_variable: return "unbound_variable";
    case ErrorCode::division_by_zero: return "division_by_zero";
    case ErrorCode::non_finite_result: return "non_finite_result";
    case ErrorCode::unresolved_parameter: return "unresolved_parameter";
    case ErrorCode::cyclic_parameter: return "cyclic_parameter";
    case ErrorCode::yield_out_of_range: return "yield_out_of_range";
    case ErrorCode::parts_per_cycle_out_of_range: return "parts_per_cycle_out_of_range";
    case ErrorCode::scrap_rate_out_of_range: return "scrap_rate_out_of_range";
    case ErrorCode::non_positive_target: return "non_positive_target";
    case ErrorCode::non_positive_budget: return "non_positive_budget";
    case ErrorCode::unknown_override: return "unknown_override";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::unknown_context: return "unknown_context";
    case ErrorCode::missing_input: return "missing_input";
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::invalid_model: return "invalid_model";
    case ErrorCode::unknown_model: return "unknown_model";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

/// Base of every error raised by the engine. `location` is a slash-separated
/// path to the node being evaluated when the error surfaced (may be empty).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string location = {})
      : std::runtime_error(message),
        code_(code),
        message_(std::move(message)),
        location_(std::move(location)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& location() const noexcept { return location_; }

  /// Prepends a path segment to the location.
  void prefix_location(std::string_view segment) {
    if (location_.empty()) {
      location_ = std::string(segment);
    } else {
      location_ = std::string(segment) + "/" + location_;
    }
  }

  std::string describe() const {
    if (location_.empty()) return message_;
    return location_ + ": " + message_;
  }

 private:
  ErrorCode code_;
  std::string message_;
  std::string location_;
};

/// Positioned parse failure. `position` is a byte offset into the parsed text;
/// line and column are 1-based and filled by parsers that track them.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::vector<std::string> expected, std::string message,
              std::size_t line = 0, std::size_t column = 0)
      : Error(ErrorCode::syntax_error, std::move(message)),
        position_(position),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
};

}  // namespace castcost
