#include "imtm/error.hpp"

namespace imtm {

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::string out = "invalid configuration:";
  for (const auto& v : violations) {
    out += "\n  - " + v;
  }
  return out;
}

}  // namespace

DecompositionError::DecompositionError(std::size_t pivot, double value)
    : Error("Cholesky decomposition failed: leading minor " + std::to_string(pivot + 1) +
            " is not positive (pivot value " + std::to_string(value) + ")"),
      pivot_(pivot) {}

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

}  // namespace imtm
