#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bdlab {

enum class ErrorKind {
  dimension,
  invalid_bound,
  arity,
  index_range,
  malformed_problem,
  scale,
  contract,
  precondition,
  internal_invariant,
  retry_exhausted,
  rank,
  parameter,
  regime,
  usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::invalid_bound: return "invalid-bound";
    case ErrorKind::arity: return "arity";
    case ErrorKind::index_range: return "index-range";
    case ErrorKind::malformed_problem: return "malformed-problem";
    case ErrorKind::scale: return "scale";
    case ErrorKind::contract: return "contract";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::internal_invariant: return "internal-invariant";
    case ErrorKind::retry_exhausted: return "retry-exhausted";
    case ErrorKind::rank: return "rank";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::regime: return "regime";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

}  // namespace bdlab
