#pragma once

// Coil-side identification: fluxgate calibration, torque and back-EMF
// coupling slopes, impedance fit, coil field constant and the rotor-field
// phasor extraction.

#include <span>

namespace magspring {

/// Steady harmonic quantity referenced to a common phase source.
struct PhasorSample {
    double freq;      // Hz
    double amplitude; // >= 0, in the unit of the measured quantity
    double phase;     // rad, in (-pi, pi]

    void validate() const;
};

struct CalibrationFit {
    double A; // V
    double B; // V
    double r_squared;
};

struct CalibrationPair {
    double theta; // rad
    double voltage;
};

/// Least squares of V_B = A sin(theta) + B.
CalibrationFit fit_calibration(std::span<const CalibrationPair> pairs);

/// asin(delta_v / A).
double delta_angle(double delta_v, double A);

struct SlopeFit {
    double slope;
    double r_squared; // 1 - SSE / sum (y - mean)^2
};

struct TorqueSample {
    double torque; // N m
    double current;
    double theta;
};

struct EmfSample {
    double voltage;
    double omega; // rad/s
    double theta;
};

/// k_T from T = k_T i cos(theta), no intercept.
SlopeFit fit_torque_coupling(std::span<const TorqueSample> samples);
/// k_EMF from u = k_EMF Omega cos(theta), no intercept.
SlopeFit fit_emf_coupling(std::span<const EmfSample> samples);

struct ImpedancePoint {
    double freq;      // Hz
    double magnitude; // ohm
};

struct ImpedanceFit {
    double resistance;
    double inductance;
    double r_squared; // of |Z|^2 against f^2
};

/// |Z|^2 = R^2 + (2 pi f L)^2 by ordinary least squares in (f^2, |Z|^2).
ImpedanceFit fit_impedance(std::span<const ImpedancePoint> points);

struct FieldPoint {
    double current; // A, amplitude
    double field;   // T, amplitude of the coil-only field
};

/// b_I from B_coil = b_I i_amp, no intercept.
SlopeFit fit_field_constant(std::span<const FieldPoint> points);

/// |B_rotor| from the net field phasor and the coil current phasor.
double extract_rotor_field(const PhasorSample& net, const PhasorSample& current, double field_per_amp);

} // namespace magspring
