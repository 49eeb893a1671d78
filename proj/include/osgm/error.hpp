#pragma once

#include <stdexcept>
#include <string>

namespace osgm {

enum class ErrorCode {
  dimension_mismatch,
  non_finite,
  hvp_unavailable,
  converged,
  invalid_argument,
  invalid_lower_bound,
  not_spd,
  too_large,
  parse_error,
  io_error,
  not_applicable,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::non_finite: return "non-finite value";
    case ErrorCode::hvp_unavailable: return "hvp unavailable";
    case ErrorCode::converged: return "converged";
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::invalid_lower_bound: return "invalid lower bound";
    case ErrorCode::not_spd: return "matrix not symmetric positive definite";
    case ErrorCode::too_large: return "problem too large";
    case ErrorCode::parse_error: return "parse error";
    case ErrorCode::io_error: return "i/o error";
    case ErrorCode::not_applicable: return "bound not applicable";
  }
  return "unknown error";
}

/// Single exception type for the library; `code()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace osgm
