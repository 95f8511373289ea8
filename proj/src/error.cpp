#include "chemcons/error.hpp"

namespace chemcons {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::schema:
      return "schema";
    case ErrorCode::infeasible_topology:
      return "infeasible_topology";
    case ErrorCode::unknown_algorithm:
      return "unknown_algorithm";
    case ErrorCode::invalid_argument:
      return "invalid_argument";
    case ErrorCode::runtime:
      return "runtime";
  }
  return "unknown";
}

}  // namespace chemcons
