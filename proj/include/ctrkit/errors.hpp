#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctrkit {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A record could not be decoded at all (bad JSON, wrong field types).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

/// A decoded value violates a domain invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t line, const std::string& reason)
      : Error(line ? "line " + std::to_string(line) + ": " + reason : reason),
        line_(line),
        reason_(reason) {}
  explicit ValidationError(const std::string& reason) : ValidationError(0, reason) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

/// Inputs outside the domain of an operation (empty corpus, empty range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctrkit
