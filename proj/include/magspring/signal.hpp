#pragma once

// Uniformly sampled series and the preprocessing used before ringdown fits:
// spectral peak estimation, zero-phase Butterworth low-pass filtering,
// amplitude-band trimming and finite-difference derivatives.

#include <cstddef>
#include <string_view>
#include <vector>

namespace magspring {

enum class Unit { rad, volt, ampere, tesla, none };

std::string_view to_string(Unit u) noexcept;

struct TimeSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;
    Unit unit = Unit::rad;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    std::vector<double> times() const;
    /// Throws unless dt > 0, all values finite and size() >= 2.
    void validate() const;
};

/// Frequency in Hz of the largest non-DC bin of the Hann-windowed spectrum,
/// refined by a parabola through the log magnitudes around the peak.
double dominant_frequency(const TimeSeries& series);

/// Fifth-order Butterworth low-pass applied forward and backward.
TimeSeries lowpass(const TimeSeries& series, double cutoff_hz);

struct CutoffChoice {
    double cutoff_hz;
    bool clamped; // 100 f_osc exceeded 0.45 / dt
};

/// 100 x dominant frequency, clamped below 0.45 / dt.
CutoffChoice default_cutoff(const TimeSeries& series);

/// Indices of local extremes of |value|: samples holding the largest
/// magnitude within +-0.3 periods of the dominant frequency. Samples closer
/// than that to the end of the series are never reported.
std::vector<std::size_t> turning_points(const TimeSeries& series);

/// Segment from the first turning point with |value| <= upper to the last
/// with |value| >= lower (inclusive).
TimeSeries trim_to_band(const TimeSeries& series, double upper, double lower);

enum class Stencil { two_point, eight_point };

/// Centered finite-difference derivative; boundary samples use one-sided
/// formulas of the same order (second order for two_point, eighth order for
/// eight_point).
TimeSeries central_derivative(const TimeSeries& series, Stencil stencil);

/// Finite-difference weights for the first derivative at `x0` from nodes `x`
/// (Fornberg's recursion).
std::vector<double> derivative_weights(double x0, const std::vector<double>& x);

} // namespace magspring
