#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmprank {

enum class ErrorCode {
  invalid_params,
  series_not_converged,
  zero_or_negative_variance,
  series_too_short,
  degenerate_series,
  lambda_at_most_one,
  nu_zero,
  malformed_header,
  malformed_row,
  unknown_team,
  empty_after_filter,
  invalid_grid,
  invalid_argument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_params: return "invalid-params";
    case ErrorCode::series_not_converged: return "series-not-converged";
    case ErrorCode::zero_or_negative_variance: return "zero-or-negative-variance";
    case ErrorCode::series_too_short: return "series-too-short";
    case ErrorCode::degenerate_series: return "degenerate-series";
    case ErrorCode::lambda_at_most_one: return "lambda-at-most-one";
    case ErrorCode::nu_zero: return "nu-zero";
    case ErrorCode::malformed_header: return "malformed-header";
    case ErrorCode::malformed_row: return "malformed-row";
    case ErrorCode::unknown_team: return "unknown-team";
    case ErrorCode::empty_after_filter: return "empty-after-filter";
    case ErrorCode::invalid_grid: return "invalid-grid";
    case ErrorCode::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cmprank
