#pragma once

#include <stdexcept>
#include <string>

namespace oppspec {

/// Thrown when a value violates a type invariant or a precondition.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an argument leaves the mathematical domain of an operation
/// (e.g. an inverse-CCDF argument outside (0,1)).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Thrown when the mixture fitting recursion cannot proceed.
struct FitError : std::runtime_error {
  int level;  // 1-based recursion level that failed, or -1
  explicit FitError(const std::string& msg, int level_ = -1)
      : std::runtime_error(msg), level(level_) {}
};

/// Thrown on malformed input files; carries the 1-based line number.
struct ParseError : std::runtime_error {
  long line;
  ParseError(const std::string& msg, long line_ = -1)
      : std::runtime_error(msg), line(line_) {}
};

}  // namespace oppspec
