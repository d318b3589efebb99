#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypotopo {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trace record could not be decoded. Carries the 1-based input line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A decoded value violates a type invariant. `field()` is a dotted path such
/// as `paths[0].steps[2].confidence`.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Remote endpoint unreachable or answered with a non-success status.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A statistic is undefined on the given sample (single class, constant input).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace hypotopo
