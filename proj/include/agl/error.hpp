#pragma once

#include <stdexcept>
#include <string>

namespace agl {

enum class ErrorCode {
  invalid_interval,
  invalid_degree,
  invalid_argument,
  out_of_domain,
  constant_column,
  rank_deficient,
  dimension_mismatch,
  contract_violation,
  all_groups_excluded,
  nonpositive_rss,
  fold_too_small,
  parse_error,
  missing_value,
  missing_column,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace agl
