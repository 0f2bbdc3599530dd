#include "magspring/coil.hpp"

#include "magspring/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace magspring {

namespace {

double r_squared(double sse, std::span<const double> y) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);
    return sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
}

// Slope of y = k x through the origin; needs >= 2 samples with distinct non-zero x.
SlopeFit origin_slope(std::span<const double> x, std::span<const double> y, const char* what) {
    std::set<double> distinct;
    for (double v : x) {
        require(std::isfinite(v), ErrorCode::domain, std::string(what) + ": non-finite regressor");
        if (v != 0.0) distinct.insert(v);
    }
    require(distinct.size() >= 2, ErrorCode::degenerate,
            std::string(what) + ": needs at least 2 distinct non-zero regressor values");
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
    }
    const double k = sxy / sxx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sse += (y[i] - k * x[i]) * (y[i] - k * x[i]);
    return {k, r_squared(sse, y)};
}

// cos(pi/2) evaluates to 6e-17; treat such angles as exactly perpendicular.
double projected_cos(double theta) {
    const double c = std::cos(theta);
    return std::abs(c) < 1e-12 ? 0.0 : c;
}

} // namespace

void PhasorSample::validate() const {
    require(std::isfinite(freq) && freq > 0.0, ErrorCode::domain, "phasor frequency must be positive");
    require(std::isfinite(amplitude) && amplitude >= 0.0, ErrorCode::domain, "phasor amplitude must be >= 0");
    require(std::isfinite(phase) && phase > -std::numbers::pi && phase <= std::numbers::pi, ErrorCode::domain,
            "phasor phase must lie in (-pi, pi]");
}

CalibrationFit fit_calibration(std::span<const CalibrationPair> pairs) {
    require(pairs.size() >= 3, ErrorCode::underdetermined, "calibration needs at least 3 pairs");
    double lo = pairs[0].theta, hi = pairs[0].theta;
    for (const auto& p : pairs) {
        require(std::isfinite(p.theta) && std::isfinite(p.voltage), ErrorCode::domain,
                "calibration pairs must be finite");
        lo = std::min(lo, p.theta);
        hi = std::max(hi, p.theta);
    }
    require(hi - lo > 10.0 * std::numbers::pi / 180.0, ErrorCode::degenerate,
            "calibration angles must span more than 10 degrees");
    const auto n = static_cast<Eigen::Index>(pairs.size());
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd y(n);
    std::vector<double> ys(pairs.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = std::sin(pairs[i].theta);
        a(i, 1) = 1.0;
        y[i] = ys[i] = pairs[i].voltage;
    }
    const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
    const double sse = (a * c - y).squaredNorm();
    return {c[0], c[1], r_squared(sse, ys)};
}

double delta_angle(double delta_v, double A) {
    require(std::isfinite(delta_v) && std::isfinite(A) && A != 0.0, ErrorCode::domain,
            "calibration amplitude must be finite and non-zero");
    require(std::abs(delta_v) <= std::abs(A), ErrorCode::out_of_range,
            "voltage change exceeds the calibration amplitude");
    return std::asin(delta_v / A);
}

SlopeFit fit_torque_coupling(std::span<const TorqueSample> samples) {
    std::vector<double> x, y;
    for (const auto& s : samples) {
        x.push_back(s.current * projected_cos(s.theta));
        y.push_back(s.torque);
    }
    return origin_slope(x, y, "torque coupling");
}

SlopeFit fit_emf_coupling(std::span<const EmfSample> samples) {
    std::vector<double> x, y;
    for (const auto& s : samples) {
        x.push_back(s.omega * projected_cos(s.theta));
        y.push_back(s.voltage);
    }
    return origin_slope(x, y, "back-EMF coupling");
}

ImpedanceFit fit_impedance(std::span<const ImpedancePoint> points) {
    std::set<double> freqs;
    for (const auto& p : points) {
        require(std::isfinite(p.freq) && p.freq >= 0.0 && std::isfinite(p.magnitude) && p.magnitude >= 0.0,
                ErrorCode::domain, "impedance points need f >= 0 and |Z| >= 0");
        freqs.insert(p.freq);
    }
    require(freqs.size() >= 2, ErrorCode::underdetermined, "impedance fit needs at least 2 distinct frequencies");
    double mx = 0.0, my = 0.0;
    std::vector<double> xs, ys;
    for (const auto& p : points) {
        xs.push_back(p.freq * p.freq);
        ys.push_back(p.magnitude * p.magnitude);
        mx += xs.back();
        my += ys.back();
    }
    const double n = static_cast<double>(points.size());
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    require(intercept >= 0.0, ErrorCode::non_physical, "impedance fit gives a negative R^2 intercept");
    require(slope >= 0.0, ErrorCode::non_physical, "impedance fit gives a negative inductive slope");
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        sse += r * r;
    }
    return {std::sqrt(intercept), std::sqrt(slope) / (2.0 * std::numbers::pi), r_squared(sse, ys)};
}

SlopeFit fit_field_constant(std::span<const FieldPoint> points) {
    std::vector<double> x, y;
    for (const auto& p : points) {
        x.push_back(p.current);
        y.push_back(p.field);
    }
    return origin_slope(x, y, "coil field constant");
}

double extract_rotor_field(const PhasorSample& net, const PhasorSample& current, double field_per_amp) {
    net.validate();
    current.validate();
    require(std::isfinite(field_per_amp) && field_per_amp >= 0.0, ErrorCode::domain, "b_I must be >= 0");
    require(std::abs(net.freq - current.freq) <= 1e-9 * std::max(net.freq, current.freq),
            ErrorCode::frequency_mismatch, "net-field and current phasors have different frequencies");
    const double phi = net.phase - current.phase;
    const double in_phase = net.amplitude * std::cos(phi) - field_per_amp * current.amplitude;
    const double quadrature = net.amplitude * std::sin(phi);
    return std::hypot(in_phase, quadrature);
}

} // namespace magspring
