#pragma once

#include <stdexcept>
#include <string>

namespace qkd {

// Bad or missing configuration: unknown preset, malformed config file or CLI
// value, invalid parameter table. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// File system failure: unreadable input or unwritable output. Exit code 4.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qkd
