#pragma once

#include <stdexcept>
#include <string>

namespace dqlap {

// Invalid or out-of-range configuration. Mapped to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or missing input data. Mapped to CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dqlap
