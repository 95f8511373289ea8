#pragma once

#include <stdexcept>
#include <string>

namespace chemcons {

enum class ErrorCode {
  schema,               // malformed or out-of-range configuration
  infeasible_topology,  // generator parameters admit no valid graph
  unknown_algorithm,
  invalid_argument,
  runtime,
};

const char* to_string(ErrorCode code);

/// Configuration problems detected before or while building a scenario.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace chemcons
