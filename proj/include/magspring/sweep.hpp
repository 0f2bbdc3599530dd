#pragma once

// Stepped-sine frequency sweeps of the coil-driven rotor: each point is
// integrated to steady state from the previous point's amplitude, and the
// response is read from the drive-frequency bin of an integer-cycle window.

#include "magspring/model.hpp"
#include "magspring/ode.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace magspring {

enum class SweepDirection { forward, backward };

std::string_view to_string(SweepDirection d) noexcept;

struct DrivePoint {
    double f_hz;
    double u_amp; // V
};

struct DriveSchedule {
    std::vector<DrivePoint> points;
    SweepDirection direction = SweepDirection::forward;

    /// Frequencies strictly monotone in the declared direction, u_amp >= 0.
    void validate() const;
    /// f_lo to f_hi inclusive in steps of step_hz at a constant amplitude;
    /// backward schedules run from f_hi down to f_lo.
    static DriveSchedule uniform(double f_lo, double f_hi, double step_hz, double u_amp, SweepDirection d);
};

struct SweepSettings {
    IntegratorSettings integrator = IntegratorSettings::sweep();
    SpringModel spring = SpringModel::sinusoidal;
    int n_fft = 32;           // analysis cycles
    int min_transient = 200;  // cycles
    double time_constants = 5.0;
    std::optional<int> n_transient; // overrides the rule above
    int samples_per_cycle = 64;
    /// Relative change between the amplitudes of the two halves of the
    /// analysis window below which a point counts as settled.
    double settle_tol = 5e-3;

    void validate() const;
    /// max(min_transient, ceil(time_constants f / (zeta omega_n))).
    int transient_cycles(const MechanicalParams& p, double f_hz) const;
};

struct SweepPoint {
    double f_hz;
    double u_amp;
    double theta_amp;   // rad
    double theta_phase; // rad, relative to the drive cos(2 pi f t)
    double i_amp;       // A
    bool converged;
};

struct SweepResult {
    SweepDirection direction;
    std::string drive_label;
    std::vector<SweepPoint> points;
};

SweepResult run_sweep(const MechanicalParams& p, const CoilParams& coil, const DriveSchedule& schedule,
                      const SweepSettings& settings = {}, std::string drive_label = {});

struct HarmonicEstimate {
    double amplitude;
    double phase; // rad, of A cos(2 pi f t + phase)
};

/// Drive-frequency bin of the final n_cycles of `values`. Series that hold an
/// integer number of samples per cycle are used as sampled; others are first
/// resampled onto such a grid by tenth-order Lagrange interpolation.
HarmonicEstimate steady_state_amplitude(const std::vector<double>& times, const std::vector<double>& values,
                                        double f_hz, int n_cycles);
HarmonicEstimate steady_state_amplitude(const Trajectory& traj, double f_hz, int n_cycles);

struct BackbonePoint {
    std::string drive_label;
    double f_peak;
    double theta_peak;
};

/// Per drive level (in input order) the maximum amplitude over all sweeps
/// carrying that label.
std::vector<BackbonePoint> extract_backbone(const std::vector<SweepResult>& sweeps);

enum class Nonlinearity { softening, stiffening_then_softening, linear, inconclusive };

std::string_view to_string(Nonlinearity n) noexcept;

/// Signs of successive f_peak changes ordered by amplitude; steps smaller than
/// tol_hz are neutral.
Nonlinearity classify_nonlinearity(std::vector<BackbonePoint> backbone, double tol_hz);

struct JumpReport {
    double fwd_jump_f;   // Hz, midpoint of the largest amplitude step
    double bwd_jump_f;
    double fwd_delta_amp; // signed change, rad, in sweep order
    double bwd_delta_amp;
    bool hysteresis;
};

/// Largest single-step amplitude change in each direction. Hysteresis is
/// declared when both steps exceed `jump_fraction` of the branch peak and
/// their locations differ by more than one frequency step.
JumpReport detect_jumps(const SweepResult& forward, const SweepResult& backward, double jump_fraction = 0.25);

} // namespace magspring
