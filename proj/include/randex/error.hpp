#pragma once

#include <stdexcept>
#include <string>

namespace randex {

// Reasons an operation can refuse to produce a result.
enum class ErrorKind {
  rank_deficient,             // design matrix column rank < p under tolerance
  non_finite,                 // NaN or infinity in a numeric input
  degenerate_auxiliary,       // auxiliary variable has zero variance
  empty_sample,               // sample-level operation got zero rows
  invalid_sample_size,        // n outside [1, N]
  too_many_subsets,           // enumeration would exceed the subset guard
  empty_group,                // a contrast group has no members
  group_too_small,            // a group is too small for the requested fit
  leverage_one,               // h_ii = 1 makes hc2/hc3 inflation undefined
  missing_df,                 // t-based interval requested without df
  out_of_domain,              // scalar parameter outside its legal range
  degenerate_variance,        // both group variances are zero
  invalid_design,             // assignment or grouping violates the design
  multi_covariate_unsupported,// operation is defined for a single covariate
  bad_data                    // malformed input file or missing column
};

// Broad category used by the CLI exit-code contract
// (0 success, 2 usage, 3 data, 4 numeric).
enum class ErrorCategory { usage, data, numeric };

constexpr ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::rank_deficient:
    case ErrorKind::leverage_one:
      return ErrorCategory::numeric;
    case ErrorKind::missing_df:
    case ErrorKind::out_of_domain:
      return ErrorCategory::usage;
    default:
      return ErrorCategory::data;
  }
}

constexpr const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::rank_deficient: return "rank_deficient";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::degenerate_auxiliary: return "degenerate_auxiliary";
    case ErrorKind::empty_sample: return "empty_sample";
    case ErrorKind::invalid_sample_size: return "invalid_sample_size";
    case ErrorKind::too_many_subsets: return "too_many_subsets";
    case ErrorKind::empty_group: return "empty_group";
    case ErrorKind::group_too_small: return "group_too_small";
    case ErrorKind::leverage_one: return "leverage_one";
    case ErrorKind::missing_df: return "missing_df";
    case ErrorKind::out_of_domain: return "out_of_domain";
    case ErrorKind::degenerate_variance: return "degenerate_variance";
    case ErrorKind::invalid_design: return "invalid_design";
    case ErrorKind::multi_covariate_unsupported:
      return "multi_covariate_unsupported";
    case ErrorKind::bad_data: return "bad_data";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  ErrorCategory category() const { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace randex
