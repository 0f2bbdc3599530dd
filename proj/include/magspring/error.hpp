#pragma once

// Error reporting for the magspring library.
//
// Every failure raised by the library is a magspring::Error carrying an
// ErrorCode. The code decides the CLI exit status (see exit_status()).

#include <stdexcept>
#include <string>
#include <string_view>

namespace magspring {

enum class ErrorCode {
    domain,              // parameter outside the physical domain of a model
    underdetermined,     // not enough data points for a fit
    degenerate,          // data cannot identify the requested quantity
    out_of_range,        // index or argument outside the admissible range
    band_not_found,      // amplitude never enters the requested band
    flat_signal,         // no oscillatory content in the spectrum
    frequency_mismatch,  // phasors referenced to different frequencies
    mismatched_grid,     // traces sampled on different time grids
    non_physical,        // fit produced a non-physical parameter set
    too_short,           // series shorter than the operation requires
    window_too_short,    // trajectory does not span the analysis window
    cutoff_out_of_range, // filter cutoff outside (0, Nyquist)
    step_underflow,      // adaptive integrator step collapsed
    no_convergence,      // iterative method did not converge
    parse,               // malformed input file
    non_uniform,         // non-uniform sampling in a time series
    config,              // invalid or missing configuration
    io,                  // file system failure
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// CLI exit status for an error code: 2 config, 3 data, 4 numerical failure.
int exit_status(ErrorCode code) noexcept;

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) fail(code, what);
}

} // namespace magspring
