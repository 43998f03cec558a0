#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qpalc {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model data or a reference to an undeclared state/agent/proposition.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Lexical or syntax error in formula text (or a file format), with a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A quantifier domain was too large to search within the configured cap.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(std::size_t budget)
      : Error("enumeration budget exceeded (cap " + std::to_string(budget) + ")"), budget_(budget) {}
  std::size_t budget() const { return budget_; }

 private:
  std::size_t budget_;
};

class TilingError : public Error {
 public:
  using Error::Error;
};

}  // namespace qpalc
