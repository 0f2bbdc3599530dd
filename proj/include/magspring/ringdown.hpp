#pragma once

// Closed-form free response of the linearized oscillator
//
//     theta'' + 2 zeta omega_n theta' + omega_n^2 theta
//             + omega_n^2 theta_f sgn(theta') = 0
//
// The motion is split into half-cycles of constant velocity sign S_k. On
// half-cycle k the response is
//
//     theta_k(t) = Theta_k exp(-zeta omega_n (t - t_k)) cos(omega_d (t - t_k) + phi_k)
//                  - S_k theta_f
//
// with turning instants t_k = t_1 + (k - 1) pi / omega_d for k >= 1 and an
// envelope Theta_k that loses a geometric (viscous) and a constant (dry)
// part every half-cycle. Half-cycle 0 runs from t = 0 to t_1 and uses
// (Theta0, phi0) directly, with t_0 = 0.
//
// The motion sticks at the first turning point whose displacement lies
// inside the friction band |theta| <= theta_f; the angle is held from then on.

#include "magspring/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace magspring {

/// Default cap on the number of half-cycles searched for motion arrest.
inline constexpr long default_max_half_cycles = 1'000'000;

/// Largest damping ratio for which the closed form has been checked against
/// direct integration.
inline constexpr double validated_zeta_limit = 0.2;

struct HalfCycleSchedule {
    RingdownModal modal;
    int z0 = 0;       // integer offset selecting the first turning instant
    double t1 = 0.0;  // first turning instant
    int S0 = 0;       // velocity sign on half-cycle 0
    double Theta1 = 0.0;
    /// Index k_stop of the turning point where the motion sticks; 0 means the
    /// rotor is at rest from t = 0. Empty when no arrest occurs within the cap.
    std::optional<long> arrest_index;
    double rest_angle = 0.0; // held angle once arrested

    double omega_d() const;
    double half_period() const;
    double turn_time(long k) const; // t_k for k >= 1, 0 for k = 0
    int sign(long k) const;         // S_k
    double phase(long k) const;     // phi_k; phi0 for k = 0
    bool beyond_validated_damping() const { return modal.zeta > validated_zeta_limit; }
};

/// Schedule from the fit parameterization (omega_n, zeta, theta_f, Theta0, phi0).
HalfCycleSchedule make_schedule(const RingdownModal& modal,
                                long max_half_cycles = default_max_half_cycles);

/// Schedule from physical initial conditions (theta0, Omega0). A start from
/// rest moves toward equilibrium; a start from rest inside the friction band
/// stays there.
HalfCycleSchedule build_schedule(const NormalizedDamping& damping, double theta0, double Omega0,
                                 long max_half_cycles = default_max_half_cycles);

/// Theta_k for 1 <= k < arrest index.
double envelope_amplitude(const HalfCycleSchedule& s, long k);

/// Smallest k >= 1 with Theta_k <= 0 (turning point inside the friction band),
/// or empty when none occurs up to `max_half_cycles`.
std::optional<long> detect_arrest(const HalfCycleSchedule& s,
                                  long max_half_cycles = default_max_half_cycles);

/// Half-cycle index containing t (ignores arrest).
long half_cycle_index(const HalfCycleSchedule& s, double t);

/// Half-cycle k's solution and its derivative evaluated at t (no arrest logic).
double half_cycle_angle(const HalfCycleSchedule& s, long k, double t);
double half_cycle_velocity(const HalfCycleSchedule& s, long k, double t);

double combined_angle(const HalfCycleSchedule& s, double t);
double combined_velocity(const HalfCycleSchedule& s, double t);
std::vector<double> combined_response(const HalfCycleSchedule& s, std::span<const double> times);

/// Purely viscous ringdown Theta0 exp(-zeta omega_n t) cos(omega_d t + phi0);
/// theta_f is ignored.
std::vector<double> viscous_response(const RingdownModal& modal, std::span<const double> times);

} // namespace magspring
