#pragma once

#include <stdexcept>
#include <string>

namespace sgf {

// Invalid configuration or arguments; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite loss or parameters during training; CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sgf
