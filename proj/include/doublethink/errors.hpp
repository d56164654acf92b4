#ifndef DOUBLETHINK_ERRORS_HPP
#define DOUBLETHINK_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace doublethink {

enum class ErrorCode {
  InvalidArgument,
  RankDeficient,
  DegenerateVariance,
  TooManyVariables,
  ZeroVarianceColumn,
  EmptyTestedSet,
  InadmissibleGroup,
  UnknownVariables,
  SearchBudgetExceeded,
  ConvergenceFailure,
  EmptyInput,
  ParseError,
  NotFound,
  ScanCapExceeded,
};

/// Stable snake_case identifier used in JSON error payloads and CLI messages.
constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::RankDeficient: return "rank_deficient";
    case ErrorCode::DegenerateVariance: return "degenerate_variance";
    case ErrorCode::TooManyVariables: return "too_many_variables";
    case ErrorCode::ZeroVarianceColumn: return "zero_variance_column";
    case ErrorCode::EmptyTestedSet: return "empty_tested_set";
    case ErrorCode::InadmissibleGroup: return "inadmissible_group";
    case ErrorCode::UnknownVariables: return "unknown_variables";
    case ErrorCode::SearchBudgetExceeded: return "search_budget_exceeded";
    case ErrorCode::ConvergenceFailure: return "convergence_failure";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::ScanCapExceeded: return "scan_cap_exceeded";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace doublethink

#endif  // DOUBLETHINK_ERRORS_HPP
