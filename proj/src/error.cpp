#include "conefield/error.hpp"

namespace conefield {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_dimension: return "invalid-dimension";
    case Errc::resolution_overflow: return "resolution-overflow";
    case Errc::non_finite_sample: return "non-finite-sample";
    case Errc::stencil_out_of_range: return "stencil-out-of-range";
    case Errc::syntax_error: return "syntax-error";
    case Errc::unknown_identifier: return "unknown-identifier";
    case Errc::arity_error: return "arity-error";
    case Errc::bad_entry_count: return "bad-entry-count";
    case Errc::non_finite_parameter: return "non-finite-parameter";
    case Errc::unknown_builtin: return "unknown-builtin";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::io_error: return "io-error";
    case Errc::eigensolver_failure: return "eigensolver-failure";
    case Errc::gauge_not_positive_definite: return "gauge-not-positive-definite";
    case Errc::gauge_not_interior: return "gauge-not-interior";
    case Errc::gauge_degenerate_direction: return "gauge-degenerate-direction";
    case Errc::inconclusive_norm: return "inconclusive-norm";
    case Errc::not_measurable: return "not-measurable";
    case Errc::not_converged: return "not-converged";
    case Errc::metric_degenerate: return "metric-degenerate";
    case Errc::volume_divergent: return "volume-divergent";
  }
  return "unknown";
}

bool is_config_error(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::invalid_dimension:
    case Errc::resolution_overflow:
    case Errc::syntax_error:
    case Errc::unknown_identifier:
    case Errc::arity_error:
    case Errc::bad_entry_count:
    case Errc::non_finite_parameter:
    case Errc::unknown_builtin:
    case Errc::dimension_mismatch:
    case Errc::io_error:
      return true;
    default:
      return false;
  }
}

}  // namespace conefield
