#include "magspring/energetics.hpp"

#include "magspring/error.hpp"

#include <algorithm>
#include <cmath>

namespace magspring {

namespace {

constexpr std::size_t edge = 4; // one-sided stencil samples at each end

// Extreme value of the cubic Hermite interpolant on [0, h] when the end
// slopes have opposite signs.
double hermite_extremum(double y0, double y1, double v0, double v1, double h) {
    // p(s) = h00 y0 + h10 h v0 + h01 y1 + h11 h v1, s in [0, 1].
    const double m0 = h * v0, m1 = h * v1;
    // p'(s) = a s^2 + b s + m0.
    const double a = 6.0 * y0 + 3.0 * m0 - 6.0 * y1 + 3.0 * m1;
    const double b = -6.0 * y0 - 4.0 * m0 + 6.0 * y1 - 2.0 * m1;
    double s;
    if (std::abs(a) < 1e-300) {
        s = -m0 / b;
    } else {
        const double disc = std::max(0.0, b * b - 4.0 * a * m0);
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        const double r1 = q / a, r2 = q != 0.0 ? m0 / q : r1;
        s = (r1 >= 0.0 && r1 <= 1.0) ? r1 : r2;
    }
    s = std::clamp(s, 0.0, 1.0);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
}

} // namespace

double mechanical_energy(double theta, double omega, double K, double J) {
    require(std::isfinite(K) && K > 0.0 && std::isfinite(J) && J > 0.0, ErrorCode::domain,
            "mechanical energy needs K > 0 and J > 0");
    return 0.5 * K * theta * theta + 0.5 * J * omega * omega;
}

EnergyTrace experimental_dissipation(const TimeSeries& theta, double K, double J) {
    mechanical_energy(0.0, 0.0, K, J);
    const TimeSeries omega = central_derivative(theta, Stencil::eight_point);
    EnergyTrace out{theta.times(), std::vector<double>(theta.size()), std::vector<double>(theta.size())};
    for (std::size_t i = 0; i < theta.size(); ++i)
        out.e_mech[i] = mechanical_energy(theta.values[i], omega.values[i], K, J);
    for (std::size_t i = 0; i < theta.size(); ++i) out.e_dis[i] = out.e_mech[0] - out.e_mech[i];
    return out;
}

EnergyTrace model_dissipation(const TimeSeries& theta, std::span<const double> omega, double c, double T_f) {
    theta.validate();
    require(omega.size() == theta.size(), ErrorCode::mismatched_grid, "velocity and angle lengths differ");
    require(std::isfinite(c) && c >= 0.0 && std::isfinite(T_f) && T_f >= 0.0, ErrorCode::domain,
            "damping torques must be >= 0");
    EnergyTrace out{theta.times(), {}, std::vector<double>(theta.size(), 0.0)};
    const double h = theta.dt;
    for (std::size_t i = 0; i + 1 < theta.size(); ++i) {
        const double y0 = theta.values[i], y1 = theta.values[i + 1];
        const double v0 = omega[i], v1 = omega[i + 1];
        // c theta' d theta = c theta'^2 dt, trapezoidal.
        const double viscous = 0.5 * c * (v0 * v0 + v1 * v1) * h;
        // Path length, split at a turning point inside the interval.
        double path = std::abs(y1 - y0);
        if (v0 * v1 < 0.0) {
            const double peak = hermite_extremum(y0, y1, v0, v1, h);
            path = std::abs(peak - y0) + std::abs(y1 - peak);
        }
        out.e_dis[i + 1] = out.e_dis[i] + viscous + T_f * path;
    }
    return out;
}

EnergyTrace model_dissipation(const TimeSeries& theta, double c, double T_f) {
    const TimeSeries omega = central_derivative(theta, Stencil::eight_point);
    return model_dissipation(theta, omega.values, c, T_f);
}

DampingTorques damping_torques(const RingdownModal& fitted, double K, double J) {
    mechanical_energy(0.0, 0.0, K, J);
    require(fitted.zeta >= 0.0 && fitted.theta_f >= 0.0, ErrorCode::domain, "fitted damping must be >= 0");
    return {2.0 * fitted.zeta * std::sqrt(J * K), fitted.theta_f * K};
}

double relative_rms_error(const EnergyTrace& experimental, const EnergyTrace& model) {
    const auto& te = experimental.times;
    const auto& tm = model.times;
    require(te.size() == tm.size() && experimental.e_dis.size() == te.size() && model.e_dis.size() == tm.size(),
            ErrorCode::mismatched_grid, "energy traces have different lengths");
    require(te.size() > 2 * edge, ErrorCode::too_short, "energy traces need more than 8 samples");
    const double span = std::abs(te.back() - te.front());
    for (std::size_t i = 0; i < te.size(); ++i)
        require(std::abs(te[i] - tm[i]) <= 1e-9 * span, ErrorCode::mismatched_grid,
                "energy traces are sampled at different times");
    double sum = 0.0, peak = 0.0;
    for (std::size_t i = edge; i + edge < te.size(); ++i) {
        const double d = experimental.e_dis[i] - model.e_dis[i];
        sum += d * d;
        peak = std::max(peak, experimental.e_dis[i]);
    }
    require(peak > 0.0, ErrorCode::degenerate, "experimental trace shows no dissipation");
    return std::sqrt(sum) / peak;
}

} // namespace magspring
