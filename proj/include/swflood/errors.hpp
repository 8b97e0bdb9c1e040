#pragma once

#include <stdexcept>
#include <string>

namespace swflood {

/// Bad scenario/terrain input: malformed files, schema violations,
/// out-of-grid placements. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The solver detected a blow-up: timestep under the abort floor,
/// CFL-violating particle displacement, or a non-finite flux.
/// CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swflood
