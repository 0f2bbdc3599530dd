#pragma once

// Energy accounting for ringdowns: measured dissipation from the decline of
// mechanical energy, model dissipation from the work done by the fitted
// damping torques, and the relative RMS error between the two traces.

#include "magspring/model.hpp"
#include "magspring/signal.hpp"

#include <span>
#include <vector>

namespace magspring {

struct EnergyTrace {
    std::vector<double> times;  // s
    std::vector<double> e_mech; // J; empty for model traces
    std::vector<double> e_dis;  // J, cumulative, e_dis[0] = 0
};

double mechanical_energy(double theta, double omega, double K, double J);

/// E_dis(t) = E_mech(0) - E_mech(t) with omega from the eight-point stencil.
EnergyTrace experimental_dissipation(const TimeSeries& theta, double K, double J);

/// Cumulative work of c theta' and T_f sign(theta') along the sampled path,
/// omega from the eight-point stencil.
EnergyTrace model_dissipation(const TimeSeries& theta, double c, double T_f);

/// Same with a known velocity at every sample (e.g. from an integrator).
EnergyTrace model_dissipation(const TimeSeries& theta, std::span<const double> omega, double c, double T_f);

struct DampingTorques {
    double c;   // N m s / rad
    double T_f; // N m
};

/// c = 2 zeta sqrt(J K), T_f = theta_f K.
DampingTorques damping_torques(const RingdownModal& fitted, double K, double J);

/// sqrt(sum dE^2) / max E_dis(experimental) over all but the first and last
/// four samples. The sum is not divided by the sample count.
double relative_rms_error(const EnergyTrace& experimental, const EnergyTrace& model);

} // namespace magspring
