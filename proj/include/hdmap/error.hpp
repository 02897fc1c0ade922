#pragma once

#include <stdexcept>
#include <string>

namespace hdmap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input that breaks a documented precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed trace or scenario document. Carries the 1-based line and the
/// column name when known.
class ParseError : public Error {
public:
  ParseError(std::size_t line, std::string column, const std::string& what)
      : Error("line " + std::to_string(line) +
              (column.empty() ? std::string{} : ", column '" + column + "'") + ": " + what),
        line_(line),
        column_(std::move(column)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::string column_;
};

}  // namespace hdmap
