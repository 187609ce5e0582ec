#pragma once

#include <stdexcept>
#include <string>

namespace bridgescore {

/// A configuration file or config struct violating its invariants. The
/// message lists every violation found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bridgescore
