#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace skillspace {

// Base for every error raised by the library. kind() is a stable, machine
// parsable class name (e.g. "BadTimestamp") that the CLI prints on failure.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// I/O failures that are not format errors.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("IoError", message) {}
};

// Rejected configuration values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error("InvalidConfig", message) {}
};

}  // namespace skillspace
