#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace idnet {

enum class ErrorKind {
  input,      // malformed or inconsistent input data / config
  numerical,  // degenerate numerical situation (zero denominators, empty networks)
  io,         // filesystem failures
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base error for the toolkit. The CLI maps the kind onto its exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& message) : Error(ErrorKind::input, message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error(ErrorKind::numerical, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::io, message) {}
};

}  // namespace idnet
