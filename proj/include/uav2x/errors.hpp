#pragma once

#include <stdexcept>
#include <string>

namespace uav2x {

// Invalid configuration file or parameter combination. CLI maps this to exit 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A caller violated an API contract (malformed matrix, infeasible seed, ...).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// The scenario cannot proceed (horizon cannot be met, no relay exists, ...).
// CLI maps this to exit 2.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace uav2x
