#pragma once

// Run configuration read from an INI file. Every physical key carries its
// unit as a suffix (`J_kg_m2`, `d_coil_cm`); lengths accept _m, _cm or _mm.
// Missing keys keep the identified rotor defaults.
//
//   [mechanical]  J_kg_m2, c_N_m_s_per_rad, T_f_N_m, T_amp_N_m
//   [coil]        R_ohm, L_H, k_T_N_m_per_A, k_EMF_V_s_per_rad, b_I_T_per_A,
//                 d_coil_<len>, loop_radius_<len>, m_R_A_m2
//   [rotor]       length_<len>, width_<len>, thickness_<len>, B_r_T
//   [stator]      length_<len>, width_<len>, thickness_<len>, B_r_T,
//                 d_stator_<len>, alpha_N_m
//   [ringdown_integrator], [sweep_integrator]
//                 rel_tol, abs_tol, max_step_s, coulomb_epsilon_rad_per_s,
//                 friction = event_exact | regularized
//   [drive]       f_lo_hz, f_hi_hz, step_hz, u_amp_v (comma list),
//                 directions = forward | backward | both, schedule_csv,
//                 n_fft, n_transient, samples_per_cycle,
//                 spring = linear | sinusoidal
//   [fit]         n_starts, seed
//   [units]       angle = deg | rad, length = cm | m

#include "magspring/model.hpp"
#include "magspring/ode.hpp"
#include "magspring/sweep.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace magspring {

enum class AngleUnit { deg, rad };
enum class LengthUnit { cm, m };

struct UnitPreferences {
    AngleUnit angle = AngleUnit::deg;
    LengthUnit length = LengthUnit::cm;

    /// Multiplier from the boundary unit to SI.
    double angle_scale() const;
    double length_scale() const;
    std::string angle_suffix() const;  // "deg" or "rad"
    std::string length_suffix() const; // "cm" or "m"
};

struct DrivePlan {
    double f_lo = 30.0;
    double f_hi = 44.0;
    double step = 0.1;
    std::vector<double> u_amps{0.3, 0.7, 1.0, 1.7};
    bool forward = true;
    bool backward = true;
    std::optional<std::filesystem::path> schedule_csv; // replaces the uniform grid

    void validate() const;
};

struct RunConfig {
    MechanicalParams mechanical{8.99e-6, 3.17e-6, 8.54e-5, 0.484};
    CoilParams coil{1.76, 1.83e-3, 9.41e-3, 9.41e-3, 4.07e-6, 0.032};
    double loop_radius = 18e-3; // m, equivalent current loop of the coil
    std::optional<double> rotor_dipole; // A m^2; default from the rotor geometry
    MagnetGeometry rotor{50.8e-3, 12.7e-3, 12.7e-3, 1.35};
    MagnetGeometry stator{76.2e-3, 12.7e-3, 12.7e-3, 1.35};
    double d_stator = 0.034;      // m
    std::optional<double> alpha;  // N m; default from the rotor geometry
    IntegratorSettings ringdown_integrator = IntegratorSettings::oracle();
    SweepSettings sweep;
    DrivePlan drive;
    int n_starts = 64;
    std::uint64_t seed = 0x6d6167737072696eULL;
    UnitPreferences units;

    double rotor_moment() const;
    double spring_alpha() const;
    /// Every section's own invariants.
    void validate() const;
};

/// Unknown sections or keys, duplicate unit variants and malformed values are
/// config errors. Relative paths in the file resolve against its directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

} // namespace magspring
