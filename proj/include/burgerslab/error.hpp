#pragma once

#include <stdexcept>
#include <string>

namespace burgerslab {

enum class Errc {
  invalid_argument,
  shape_mismatch,
  stability_violation,
  non_positive,
  under_resolved,
  off_grid,
  too_short,
  non_divisible,
  support_violation,
  mismatched_realization,
  dimension,
  invalid_config,
  io,
};

const char* to_string(Errc code);

// All library failures surface as LabError; the code lets callers and tests
// distinguish the named error conditions without parsing messages.
class LabError : public std::runtime_error {
 public:
  LabError(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace burgerslab
