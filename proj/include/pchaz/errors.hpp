#pragma once

#include <stdexcept>
#include <string>

namespace pchaz {

/// Input that violates a documented precondition (bad data, bad config).
/// The CLI maps this family to exit code 2; anything else is internal.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed number or token in an input file.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, long row)
      : ValidationError(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  long row() const noexcept { return row_; }

 private:
  long row_;
};

/// Missing or duplicated column in an input file header.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace pchaz
