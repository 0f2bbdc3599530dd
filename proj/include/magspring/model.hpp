#pragma once

// Domain types and the lumped physical model of the torsional magnetic
// oscillator: stator field of a rectangular magnet, rotor dipole moment,
// sinusoidal magnetic spring, coil torque and back-EMF couplings, and the
// empirical power-law fit used to relate parameters to the stator gap.
//
// Units are SI throughout; angles are radians.

#include <numbers>
#include <span>
#include <utility>

namespace magspring {

/// Vacuum permeability, N/A^2.
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;

/// Rectangular permanent magnet: length, width, thickness (m) and residual
/// flux density (T).
struct MagnetGeometry {
    double length;
    double width;
    double thickness;
    double residual_flux;

    double volume() const { return length * width * thickness; }
    void validate() const;
};

/// Physical rotor parameters.
struct MechanicalParams {
    double inertia;      // J, kg m^2
    double viscous;      // c, N m s / rad
    double dry_friction; // T_f, N m
    double spring_amp;   // T_amp, N m (equals the linearized stiffness K_Mag)

    void validate() const;
};

/// Normalized ringdown parameters. Theta0/phi0 are the amplitude and phase
/// of the first half-cycle's homogeneous solution.
struct RingdownModal {
    double omega_n;
    double zeta;
    double theta_f;
    double Theta0;
    double phi0;

    double omega_d() const;
    void validate() const;
};

struct CoilParams {
    double resistance;   // R, ohm
    double inductance;   // L, H
    double k_torque;     // k_T, N m / A
    double k_emf;        // k_EMF, V s / rad
    double field_per_amp;// b_I, T / A
    double distance;     // d_coil, m

    void validate() const;
};

struct PowerLawFit {
    double prefactor; // A
    double exponent;  // n
    double r_squared;

    double operator()(double d) const;
};

/// The (omega_n, zeta, theta_f) triple of the normalized equation of motion.
struct NormalizedDamping {
    double omega_n;
    double zeta;
    double theta_f;
};

/// On-axis field of a rectangular magnet at `d_stator` from its center.
/// d_stator must exceed half the thickness.
double stator_field(double d_stator, const MagnetGeometry& geom);

/// Bracketed arctangent difference g(d_stator); B_S = (2 B_r / pi) g.
double stator_gap_factor(double d_stator, const MagnetGeometry& geom);

/// Equivalent dipole moment B_r V / mu0 of a uniformly magnetized volume.
double dipole_moment(double residual_flux, double volume);
double dipole_moment(const MagnetGeometry& geom);

/// Prefactor alpha = 2 B_r^2 V / (pi mu0) of the spring amplitude model.
double spring_prefactor(const MagnetGeometry& rotor);

/// T_amp = alpha g(d_stator) for a stator of geometry `stator`.
double spring_amplitude(double d_stator, const MagnetGeometry& stator, double alpha);

double restoring_torque(double theta, double spring_amp);
double coil_torque(double theta, double current, double k_torque);
double back_emf(double theta, double omega, double k_emf);

/// beta = (mu0 / 2 pi) m_R A_coil with A_coil = 2 pi R_loop L / mu0,
/// so that k_EMF(d) = beta d^-3.
double beta_model(double inductance, double loop_radius, double dipole);
double emf_coefficient(double beta, double d_coil);

/// Ordinary least squares of log y against log d.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points);

NormalizedDamping normalize(const MechanicalParams& p);
/// Rebuilds (c, T_f, T_amp) from normalized values and the inertia.
MechanicalParams denormalize(const NormalizedDamping& n, double inertia);

} // namespace magspring
