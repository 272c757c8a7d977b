#pragma once

#include <stdexcept>

namespace tlr {

/// Malformed or inconsistent configuration (files, CLI overrides, run setup).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tlr
