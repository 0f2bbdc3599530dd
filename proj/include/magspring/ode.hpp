#pragma once

// Adaptive Runge-Kutta integration of the rotor equations.
//
// Free system:     J theta'' + c theta' + K(theta) + T_f sgn(theta') = 0
// Coupled system:  L i' + R i + k_EMF theta' cos(theta) = U(t)
//                  J theta'' + c theta' + T_f sgn(theta') + K(theta) = k_T i cos(theta)
//
// with K(theta) = T_amp theta (linear spring) or T_amp sin(theta). Dry
// friction is handled either event-exactly (sliding phases with a fixed
// friction sign, switched or stuck at every zero-velocity event) or by a
// smooth tanh(theta' / epsilon) regularization.

#include "magspring/model.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace magspring {

enum class SpringModel { linear, sinusoidal };
enum class FrictionModel { event_exact, regularized };

struct IntegratorSettings {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = 0.0;          // s; 0 means unbounded
    double coulomb_epsilon = 1e-4;  // rad/s, tanh regularization scale
    FrictionModel friction = FrictionModel::event_exact;

    /// Tight tolerances with event-exact friction, for cross-checking the closed form.
    static IntegratorSettings oracle();
    /// Sweep defaults: looser tolerances with regularized friction.
    static IntegratorSettings sweep();
    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> theta;
    std::vector<double> omega;
    std::vector<double> current; // empty for free runs
    std::optional<double> arrest_time;
    long events = 0; // zero-velocity and unsticking events handled

    std::size_t size() const { return times.size(); }
    bool has_current() const { return !current.empty(); }
};

/// Coil input voltage as a function of time.
struct VoltageDrive {
    std::function<double(double)> voltage;

    double operator()(double t) const { return voltage ? voltage(t) : 0.0; }
    /// U_amp cos(2 pi f t).
    static VoltageDrive harmonic(double amplitude, double frequency_hz);
    static VoltageDrive none();
};

struct CoupledState {
    double theta = 0.0;
    double omega = 0.0;
    double current = 0.0;
};

/// Output grid: samples at record_from + m * sample_dt up to t_end.
struct SampleGrid {
    double sample_dt;
    double record_from = 0.0;
};

Trajectory integrate_free(const MechanicalParams& p, double theta0, double Omega0, double t_end,
                          const SampleGrid& grid, const IntegratorSettings& settings,
                          SpringModel spring = SpringModel::linear);

Trajectory integrate_coupled(const MechanicalParams& p, const CoilParams& coil,
                             const VoltageDrive& drive, const CoupledState& ic, double t_end,
                             const SampleGrid& grid, const IntegratorSettings& settings,
                             SpringModel spring = SpringModel::sinusoidal);

} // namespace magspring
