#include "magspring/ringdown.hpp"

#include "magspring/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace magspring {

namespace {

constexpr double pi = std::numbers::pi;

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

// zeta / sqrt(1 - zeta^2) and its arctangent.
double damping_slope(double zeta) { return zeta / std::sqrt(1.0 - zeta * zeta); }
double damping_angle(double zeta) { return std::atan(damping_slope(zeta)); }

// Logarithmic decrement of the envelope over one half-cycle.
double half_cycle_decrement(double zeta) { return pi * damping_slope(zeta); }

// Constant envelope loss 2 theta_f / sqrt(1 - zeta^2) per half-cycle.
double dry_loss(const RingdownModal& m) { return 2.0 * m.theta_f / std::sqrt(1.0 - m.zeta * m.zeta); }

// sum_{j=0}^{n-1} exp(-j delta) = (1 - e^{-n delta}) / (1 - e^{-delta}).
double geometric_sum(long n, double delta) {
    if (delta == 0.0) return static_cast<double>(n);
    return std::expm1(-static_cast<double>(n) * delta) / std::expm1(-delta);
}

double envelope_unchecked(const HalfCycleSchedule& s, long k) {
    const long n = k - 1;
    const double delta = half_cycle_decrement(s.modal.zeta);
    return s.Theta1 * std::exp(-static_cast<double>(n) * delta) - dry_loss(s.modal) * geometric_sum(n, delta);
}

double arrest_tolerance(const HalfCycleSchedule& s) {
    return 16.0 * std::numeric_limits<double>::epsilon() * std::abs(s.Theta1);
}

HalfCycleSchedule finish(HalfCycleSchedule s, long max_half_cycles) {
    const RingdownModal& m = s.modal;
    const double wd = m.omega_d();
    s.Theta1 = m.Theta0 * std::exp(-m.zeta * m.omega_n * s.t1) * std::cos(wd * s.t1 + m.phi0) /
                   (s.S0 * std::sqrt(1.0 - m.zeta * m.zeta)) -
               dry_loss(m);
    s.arrest_index = detect_arrest(s, max_half_cycles);
    if (s.arrest_index) {
        const long k = *s.arrest_index;
        s.rest_angle = half_cycle_angle(s, k - 1, s.turn_time(k));
    }
    return s;
}

} // namespace

double HalfCycleSchedule::omega_d() const { return modal.omega_d(); }

double HalfCycleSchedule::half_period() const { return pi / omega_d(); }

double HalfCycleSchedule::turn_time(long k) const {
    if (k <= 0) return 0.0;
    return t1 + static_cast<double>(k - 1) * half_period();
}

int HalfCycleSchedule::sign(long k) const { return (k % 2 == 0) ? S0 : -S0; }

double HalfCycleSchedule::phase(long k) const {
    if (k == 0) return modal.phi0;
    return -damping_angle(modal.zeta) + (1 + sign(k)) * (pi / 2.0);
}

HalfCycleSchedule make_schedule(const RingdownModal& modal, long max_half_cycles) {
    modal.validate();
    HalfCycleSchedule s;
    s.modal = modal;
    const double psi = damping_angle(modal.zeta);
    const double x = -(psi + modal.phi0) / pi;
    const double nearest = std::round(x);
    if (std::abs(x - nearest) < 1e-13) {
        // Zero initial velocity: t = 0 is itself a turning point, so the first
        // half-cycle is a full one and the motion heads back toward equilibrium.
        s.S0 = std::cos(modal.phi0) > 0.0 ? -1 : 1;
        s.z0 = static_cast<int>(nearest) - 1;
        s.t1 = s.half_period();
    } else {
        s.S0 = -sgn(std::sin(modal.phi0 + psi));
        s.z0 = static_cast<int>(std::floor(x));
        s.t1 = -(psi + s.z0 * pi + modal.phi0) / modal.omega_d();
    }
    return finish(s, max_half_cycles);
}

HalfCycleSchedule build_schedule(const NormalizedDamping& damping, double theta0, double Omega0,
                                 long max_half_cycles) {
    require(std::isfinite(theta0) && std::isfinite(Omega0), ErrorCode::domain,
            "initial conditions must be finite");
    require(theta0 != 0.0 || Omega0 != 0.0, ErrorCode::degenerate,
            "initial conditions theta0 = Omega0 = 0 give no motion");
    RingdownModal modal{damping.omega_n, damping.zeta, damping.theta_f, 0.0, 0.0};
    modal.validate();

    if (Omega0 == 0.0 && std::abs(theta0) <= damping.theta_f) {
        HalfCycleSchedule s;
        s.modal = modal;
        s.S0 = -sgn(theta0);
        s.arrest_index = 0;
        s.rest_angle = theta0;
        return s;
    }

    const int S0 = Omega0 != 0.0 ? sgn(Omega0) : -sgn(theta0);
    const double u = theta0 + S0 * damping.theta_f; // Theta0 cos(phi0)
    double phi0;
    if (Omega0 == 0.0) {
        phi0 = -damping_angle(damping.zeta) + (u > 0.0 ? 0.0 : pi);
        modal.Theta0 = std::abs(u) / std::cos(damping_angle(damping.zeta));
    } else {
        const double v = -Omega0 / modal.omega_d() - damping_slope(damping.zeta) * u;
        phi0 = std::atan2(v, u);
        modal.Theta0 = std::hypot(u, v);
    }
    if (phi0 <= -pi) phi0 += 2.0 * pi;
    modal.phi0 = phi0;

    HalfCycleSchedule s;
    s.modal = modal;
    s.S0 = S0;
    if (Omega0 == 0.0) {
        s.z0 = S0 < 0 ? -1 : -2;
        s.t1 = s.half_period();
    } else {
        const double psi = damping_angle(damping.zeta);
        s.z0 = static_cast<int>(std::floor(-(psi + phi0) / pi));
        s.t1 = -(psi + s.z0 * pi + phi0) / modal.omega_d();
        if (s.t1 <= 0.0) {
            s.z0 -= 1;
            s.t1 += s.half_period();
        }
    }
    return finish(s, max_half_cycles);
}

std::optional<long> detect_arrest(const HalfCycleSchedule& s, long max_half_cycles) {
    const double tol = arrest_tolerance(s);
    if (s.Theta1 <= tol) return 1;
    const double b = dry_loss(s.modal);
    if (b == 0.0) return std::nullopt;
    const double delta = half_cycle_decrement(s.modal.zeta);

    // Closed-form crossing of Theta_k = 0, then settle the integer exactly.
    double n_cross;
    if (delta == 0.0) {
        n_cross = s.Theta1 / b;
    } else {
        const double plateau = -b / std::expm1(-delta);
        n_cross = std::log1p(s.Theta1 / plateau) / delta;
    }
    if (!(n_cross + 1.0 <= static_cast<double>(max_half_cycles) + 2.0)) return std::nullopt;
    long k = static_cast<long>(std::ceil(n_cross)) + 1;
    if (k < 2) k = 2;
    while (k > 2 && envelope_unchecked(s, k - 1) <= tol) --k;
    while (k <= max_half_cycles && envelope_unchecked(s, k) > tol) ++k;
    if (k > max_half_cycles) return std::nullopt;
    return k;
}

double envelope_amplitude(const HalfCycleSchedule& s, long k) {
    require(k >= 1, ErrorCode::out_of_range, "envelope index must be >= 1");
    require(!s.arrest_index || k < *s.arrest_index, ErrorCode::out_of_range,
            "envelope index at or beyond the arrest half-cycle");
    return envelope_unchecked(s, k);
}

long half_cycle_index(const HalfCycleSchedule& s, double t) {
    if (t < s.t1) return 0;
    return 1 + static_cast<long>(std::floor((t - s.t1) / s.half_period()));
}

double half_cycle_angle(const HalfCycleSchedule& s, long k, double t) {
    const RingdownModal& m = s.modal;
    const double tau = t - s.turn_time(k);
    const double amp = k == 0 ? m.Theta0 : envelope_unchecked(s, k);
    return amp * std::exp(-m.zeta * m.omega_n * tau) * std::cos(m.omega_d() * tau + s.phase(k)) -
           s.sign(k) * m.theta_f;
}

double half_cycle_velocity(const HalfCycleSchedule& s, long k, double t) {
    const RingdownModal& m = s.modal;
    const double tau = t - s.turn_time(k);
    const double amp = k == 0 ? m.Theta0 : envelope_unchecked(s, k);
    const double wd = m.omega_d();
    const double arg = wd * tau + s.phase(k);
    return -wd * amp * std::exp(-m.zeta * m.omega_n * tau) *
           (damping_slope(m.zeta) * std::cos(arg) + std::sin(arg));
}

double combined_angle(const HalfCycleSchedule& s, double t) {
    if (s.arrest_index && *s.arrest_index == 0) return s.rest_angle;
    const long k = half_cycle_index(s, t);
    if (s.arrest_index && k >= *s.arrest_index) return s.rest_angle;
    return half_cycle_angle(s, k, t);
}

double combined_velocity(const HalfCycleSchedule& s, double t) {
    if (s.arrest_index && *s.arrest_index == 0) return 0.0;
    const long k = half_cycle_index(s, t);
    if (s.arrest_index && k >= *s.arrest_index) return 0.0;
    return half_cycle_velocity(s, k, t);
}

std::vector<double> combined_response(const HalfCycleSchedule& s, std::span<const double> times) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(combined_angle(s, t));
    return out;
}

std::vector<double> viscous_response(const RingdownModal& modal, std::span<const double> times) {
    require(modal.omega_n > 0.0 && modal.zeta >= 0.0 && modal.zeta < 1.0, ErrorCode::domain,
            "viscous response needs omega_n > 0 and 0 <= zeta < 1");
    const double wd = modal.omega_d();
    const double decay = modal.zeta * modal.omega_n;
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(modal.Theta0 * std::exp(-decay * t) * std::cos(wd * t + modal.phi0));
    return out;
}

} // namespace magspring
