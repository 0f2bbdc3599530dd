#pragma once

// Ringdown identification: multi-start least-squares fits of the purely
// viscous and the combined (viscous + dry friction) free-response models.

#include "magspring/model.hpp"
#include "magspring/signal.hpp"

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace magspring {

struct FitParameter {
    std::string name;
    double value;
    std::string unit;
};

struct FitReport {
    std::string model; // "viscous" or "combined"
    std::vector<FitParameter> parameters;
    double sse = 0.0;
    double r_squared = 0.0; // 1 - SSE / sum (y - mean)^2
    int n_starts_used = 0;
    bool converged = false; // at least one start met the stopping tolerance
    std::vector<std::string> notes;

    double value(std::string_view name) const;
    /// Fitted parameters as a modal set; theta_f = 0 for the viscous model.
    RingdownModal modal() const;
};

struct FitOptions {
    int n_starts = 64;
    std::uint64_t seed = 0x6d6167737072696eULL;
};

/// Theta0 exp(-zeta omega_n t) cos(omega_d t + phi0) with t measured from
/// the first sample.
FitReport fit_viscous_model(const TimeSeries& series, const FitOptions& options = {});

/// Closed-form combined-damping ringdown with t measured from the first sample.
FitReport fit_combined_model(const TimeSeries& series, const FitOptions& options = {});

struct PreprocessOptions {
    bool filter = true;
    std::optional<double> cutoff_hz; // default: default_cutoff()
    bool trim = true;
    double upper = 15.0 * std::numbers::pi / 180.0;
    double lower = 2.5 * std::numbers::pi / 180.0;
};

struct Preprocessed {
    TimeSeries series;
    std::vector<std::string> notes;
};

/// Low-pass filtering followed by trimming to the amplitude band.
Preprocessed preprocess_ringdown(const TimeSeries& raw, const PreprocessOptions& options = {});

struct RingdownFits {
    TimeSeries series; // the preprocessed data both models were fitted to
    FitReport viscous;
    FitReport combined;
};

RingdownFits fit_ringdown(const TimeSeries& raw, const PreprocessOptions& pre = {},
                          const FitOptions& options = {});

} // namespace magspring
