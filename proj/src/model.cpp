#include "magspring/model.hpp"

#include "magspring/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace magspring {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

// arctan(L W / (2 x sqrt(4x^2 + L^2 + W^2))), the field term of a face at
// distance x along the magnet's central axis.
double face_term(double x, double L, double W) {
    return std::atan(L * W / (2.0 * x * std::sqrt(4.0 * x * x + L * L + W * W)));
}

} // namespace

void MagnetGeometry::validate() const {
    require(positive(length) && positive(width) && positive(thickness) &&
                positive(residual_flux),
            ErrorCode::domain, "magnet dimensions and residual flux must be positive");
}

void MechanicalParams::validate() const {
    require(positive(inertia), ErrorCode::domain, "inertia must be positive");
    require(non_negative(viscous), ErrorCode::domain, "viscous coefficient must be >= 0");
    require(non_negative(dry_friction), ErrorCode::domain, "dry friction torque must be >= 0");
    require(positive(spring_amp), ErrorCode::domain, "spring amplitude must be positive");
}

double RingdownModal::omega_d() const { return omega_n * std::sqrt(1.0 - zeta * zeta); }

void RingdownModal::validate() const {
    require(positive(omega_n), ErrorCode::domain, "omega_n must be positive");
    require(non_negative(zeta) && zeta < 1.0, ErrorCode::domain,
            "zeta must lie in [0, 1) for an oscillatory ringdown");
    require(non_negative(theta_f), ErrorCode::domain, "theta_f must be >= 0");
    require(non_negative(Theta0), ErrorCode::domain, "Theta0 must be >= 0");
    require(std::isfinite(phi0) && phi0 > -std::numbers::pi && phi0 <= std::numbers::pi,
            ErrorCode::domain, "phi0 must lie in (-pi, pi]");
}

void CoilParams::validate() const {
    require(positive(resistance) && positive(inductance), ErrorCode::domain,
            "coil resistance and inductance must be positive");
    require(non_negative(k_torque) && non_negative(k_emf) && non_negative(field_per_amp),
            ErrorCode::domain, "coupling coefficients must be >= 0");
    require(positive(distance), ErrorCode::domain, "coil distance must be positive");
}

double PowerLawFit::operator()(double d) const { return prefactor * std::pow(d, exponent); }

double stator_gap_factor(double d_stator, const MagnetGeometry& geom) {
    geom.validate();
    const double d = d_stator - 0.5 * geom.thickness;
    require(std::isfinite(d_stator) && d > 0.0, ErrorCode::domain,
            "d_stator must exceed half the stator thickness");
    return face_term(d, geom.length, geom.width) -
           face_term(d + geom.thickness, geom.length, geom.width);
}

double stator_field(double d_stator, const MagnetGeometry& geom) {
    return 2.0 * geom.residual_flux / std::numbers::pi * stator_gap_factor(d_stator, geom);
}

double dipole_moment(double residual_flux, double volume) {
    require(non_negative(residual_flux), ErrorCode::domain, "residual flux must be >= 0");
    require(positive(volume), ErrorCode::domain, "magnet volume must be positive");
    return residual_flux * volume / mu0;
}

double dipole_moment(const MagnetGeometry& geom) {
    geom.validate();
    return dipole_moment(geom.residual_flux, geom.volume());
}

double spring_prefactor(const MagnetGeometry& rotor) {
    return 2.0 * rotor.residual_flux * dipole_moment(rotor) / std::numbers::pi;
}

double spring_amplitude(double d_stator, const MagnetGeometry& stator, double alpha) {
    require(positive(alpha), ErrorCode::domain, "alpha must be positive");
    return alpha * stator_gap_factor(d_stator, stator);
}

double restoring_torque(double theta, double spring_amp) { return -spring_amp * std::sin(theta); }

double coil_torque(double theta, double current, double k_torque) {
    return k_torque * current * std::cos(theta);
}

double back_emf(double theta, double omega, double k_emf) { return k_emf * omega * std::cos(theta); }

double beta_model(double inductance, double loop_radius, double dipole) {
    require(positive(inductance) && positive(loop_radius) && positive(dipole), ErrorCode::domain,
            "inductance, loop radius and dipole moment must be positive");
    const double coil_area = 2.0 * std::numbers::pi * loop_radius * inductance / mu0;
    return mu0 / (2.0 * std::numbers::pi) * dipole * coil_area;
}

double emf_coefficient(double beta, double d_coil) {
    require(positive(d_coil), ErrorCode::domain, "coil distance must be positive");
    return beta / (d_coil * d_coil * d_coil);
}

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
    require(points.size() >= 2, ErrorCode::underdetermined, "power-law fit needs >= 2 points");
    std::set<double> abscissae;
    double mx = 0.0, my = 0.0;
    for (const auto& [d, y] : points) {
        require(positive(d) && positive(y), ErrorCode::domain,
                "power-law fit needs strictly positive data");
        require(abscissae.insert(d).second, ErrorCode::domain,
                "power-law fit needs distinct abscissae");
        mx += std::log(d);
        my += std::log(y);
    }
    const double n = static_cast<double>(points.size());
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [d, y] : points) {
        const double dx = std::log(d) - mx;
        const double dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double sse = 0.0;
    for (const auto& [d, y] : points) {
        const double r = std::log(y) - (intercept + slope * std::log(d));
        sse += r * r;
    }
    const double r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    return {std::exp(intercept), slope, r2};
}

NormalizedDamping normalize(const MechanicalParams& p) {
    p.validate();
    return {std::sqrt(p.spring_amp / p.inertia),
            p.viscous / (2.0 * std::sqrt(p.inertia * p.spring_amp)),
            p.dry_friction / p.spring_amp};
}

MechanicalParams denormalize(const NormalizedDamping& n, double inertia) {
    require(positive(inertia), ErrorCode::domain, "inertia must be positive");
    require(positive(n.omega_n), ErrorCode::domain, "omega_n must be positive");
    require(non_negative(n.zeta) && non_negative(n.theta_f), ErrorCode::domain,
            "zeta and theta_f must be >= 0");
    const double spring = inertia * n.omega_n * n.omega_n;
    return {inertia, 2.0 * inertia * n.omega_n * n.zeta, n.theta_f * spring, spring};
}

} // namespace magspring
