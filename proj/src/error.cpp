#include "magspring/error.hpp"

namespace magspring {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::underdetermined: return "underdetermined";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::band_not_found: return "band_not_found";
    case ErrorCode::flat_signal: return "flat_signal";
    case ErrorCode::frequency_mismatch: return "frequency_mismatch";
    case ErrorCode::mismatched_grid: return "mismatched_grid";
    case ErrorCode::non_physical: return "non_physical";
    case ErrorCode::too_short: return "too_short";
    case ErrorCode::window_too_short: return "window_too_short";
    case ErrorCode::cutoff_out_of_range: return "cutoff_out_of_range";
    case ErrorCode::step_underflow: return "step_underflow";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::parse: return "parse";
    case ErrorCode::non_uniform: return "non_uniform";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    }
    return "unknown";
}

int exit_status(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::config:
    case ErrorCode::domain:
    case ErrorCode::cutoff_out_of_range:
        return 2;
    case ErrorCode::step_underflow:
    case ErrorCode::no_convergence:
    case ErrorCode::non_physical:
        return 4;
    default:
        return 3;
    }
}

} // namespace magspring
