#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wmcvar {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (vtree, sdd, DIMACS, JSON).
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line, std::size_t column)
      : Error(format(what, line, column)), line_(line), column_(column) {}
  explicit ParseError(const std::string &what) : Error(what) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  static std::string format(const std::string &what, std::size_t line,
                            std::size_t column) {
    return "line " + std::to_string(line) + ", col " + std::to_string(column) +
           ": " + what;
  }

  std::size_t line_ = 0;
  std::size_t column_ = 0;
};

/// A circuit violates a structural property required by an operation
/// (decomposability, structuredness, normal form, decision-node consistency).
class StructureError : public Error {
public:
  using Error::Error;
};

/// Weight model does not fit the variables or is otherwise inconsistent.
class WeightError : public Error {
public:
  using Error::Error;
};

/// Two circuits that must share a vtree do not.
class VtreeMismatchError : public Error {
public:
  using Error::Error;
};

/// Evidence names an unknown variable or value.
class EvidenceError : public Error {
public:
  using Error::Error;
};

/// The SDD compiler exceeded its node budget.
class CompileLimitError : public Error {
public:
  using Error::Error;
};

/// Argument outside an operation's domain.
class DomainError : public Error {
public:
  using Error::Error;
};

} // namespace wmcvar
