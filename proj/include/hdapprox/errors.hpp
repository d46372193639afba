#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdapprox {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_integer_flip_count,
  zero_vector,
  feature_index_out_of_range,
  missing_tie_bits,
  invalid_trunc_depth,
  empty_class,
  insufficient_brams,
  empty_stream,
  calibration_out_of_range,
  parse_error,
  missing_label_column,
  version_mismatch,
  corrupt_file,
  config_error,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; `code()` identifies
// the failure class so callers and tests can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hdapprox
