#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace basedlab {

enum class ErrorKind {
  Domain,          // argument outside the operation's domain
  Capacity,        // a hard cap (brains, validators, miners, burn supply) is full
  Degenerate,      // inputs carry no usable weight (all-zero stake, etc.)
  Shape,           // matrix/vector dimensions do not compose
  ContextExceeded, // prompt larger than a model's context window
  InsufficientFunds,
  NotFound,
  Duplicate,
  NotPermitted,    // operation forbidden by a lifecycle rule
  Validation,      // malformed configuration; carries a field path
  Syntax,          // expression parse failure; carries a position
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Configuration error tied to a JSON-style field path such as
/// `brains[2].owner_fraction`.
class ValidationError : public Error {
 public:
  ValidationError(std::string field_path, const std::string& message)
      : Error(ErrorKind::Validation, field_path + ": " + message),
        field_path_(std::move(field_path)) {}

  const std::string& field_path() const noexcept { return field_path_; }

 private:
  std::string field_path_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error(ErrorKind::Syntax,
              "syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace basedlab
