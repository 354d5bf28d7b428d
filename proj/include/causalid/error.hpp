#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace causalid {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural problems with a graph: unknown vertex, self-loop, cycle, ...
class GraphError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Line and column are 1-based; column 0 means the
/// whole line is at fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

/// Invalid query or argument combination (overlapping sets, bad treatment, ...).
class QueryError : public Error {
 public:
  using Error::Error;
};

/// Raised while evaluating an estimand: zero-probability conditioning or an
/// unbound symbol.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace causalid
