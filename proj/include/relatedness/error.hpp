#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relatedness {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  usage,               // bad flags or configuration
  parse,               // malformed input file content
  schema,              // mapped column/field missing, category lists disagree
  lookup,              // unknown id
  insufficient_data,   // empty bucket, empty selection
  arity,               // wrong number of items (k > n, empty list, ...)
  dimension,           // vector lengths disagree
  undefined_similarity,
  infinite_divergence,
  undefined_score,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::parse: return "parse";
    case ErrorKind::schema: return "schema";
    case ErrorKind::lookup: return "lookup";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::arity: return "arity";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::undefined_similarity: return "undefined_similarity";
    case ErrorKind::infinite_divergence: return "infinite_divergence";
    case ErrorKind::undefined_score: return "undefined_score";
  }
  return "unknown";
}

/// 1 usage, 2 data, 3 numeric.
constexpr int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage: return 1;
    case ErrorKind::parse:
    case ErrorKind::schema:
    case ErrorKind::lookup:
    case ErrorKind::insufficient_data: return 2;
    case ErrorKind::arity:
    case ErrorKind::dimension:
    case ErrorKind::undefined_similarity:
    case ErrorKind::infinite_divergence:
    case ErrorKind::undefined_score: return 3;
  }
  return 2;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace relatedness
