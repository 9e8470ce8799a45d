#pragma once

#include <stdexcept>
#include <string>

namespace eerelay {

/// Raised when an argument lies outside an operation's domain.
class InvalidParameter : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the brute-force search when the enumeration guard trips.
class InstanceTooLarge : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class EmptyInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration parse or validation failure. `line()` is 0 when the
/// problem is not tied to a line of a config document.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const noexcept { return line_; }

private:
  int line_;
};

}  // namespace eerelay
