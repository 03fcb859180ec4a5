#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace conefield {

enum class Errc {
  invalid_argument,
  invalid_dimension,
  resolution_overflow,
  non_finite_sample,
  stencil_out_of_range,
  syntax_error,
  unknown_identifier,
  arity_error,
  bad_entry_count,
  non_finite_parameter,
  unknown_builtin,
  dimension_mismatch,
  io_error,
  eigensolver_failure,
  gauge_not_positive_definite,
  gauge_not_interior,
  gauge_degenerate_direction,
  inconclusive_norm,
  not_measurable,
  not_converged,
  metric_degenerate,
  volume_divergent,
};

std::string_view errc_name(Errc code);

// Errors caused by malformed input or configuration, as opposed to numerical
// failures discovered while evaluating well-formed input.
bool is_config_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::optional<std::size_t> offset = std::nullopt)
      : std::runtime_error(message), code_(code), offset_(offset) {}

  Errc code() const noexcept { return code_; }
  // Byte offset into the offending text, for parse errors.
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  Errc code_;
  std::optional<std::size_t> offset_;
};

}  // namespace conefield
