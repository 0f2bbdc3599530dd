#include "magspring/signal.hpp"

#include "magspring/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

namespace magspring {

namespace {

constexpr double pi = std::numbers::pi;

// FFTW planning is not thread-safe.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<std::complex<double>> real_spectrum(std::vector<double> x) {
    const int n = static_cast<int>(x.size());
    std::vector<std::complex<double>> out(x.size() / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(n, x.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

// One transposed direct-form II section; a first-order section has b2 = a2 = 0.
struct Section {
    double b0, b1, b2, a1, a2;

    std::array<double, 2> steady_state(double x) const {
        const double z2 = (b2 - a2) * x;
        return {(b1 - a1) * x + z2, z2};
    }
};

constexpr int butterworth_order = 5;

std::vector<Section> butterworth_sections(double cutoff_hz, double dt) {
    const double fs2 = 2.0 / dt;
    const double warped = fs2 * std::tan(pi * cutoff_hz * dt);
    std::vector<Section> out;
    auto to_z = [fs2](std::complex<double> s) { return (fs2 + s) / (fs2 - s); };
    // Analog poles warped * exp(i pi (2k + n - 1) / 2n); one per conjugate pair here.
    for (int k = 1; k <= butterworth_order / 2; ++k) {
        const double angle = pi * (2.0 * k + butterworth_order - 1.0) / (2.0 * butterworth_order);
        const std::complex<double> z = to_z(warped * std::polar(1.0, angle));
        const double a1 = -2.0 * z.real(), a2 = std::norm(z);
        const double g = (1.0 + a1 + a2) / 4.0;
        out.push_back({g, 2.0 * g, g, a1, a2});
    }
    const double zr = to_z({-warped, 0.0}).real();
    const double g = (1.0 - zr) / 2.0;
    out.push_back({g, g, 0.0, -zr, 0.0});
    return out;
}

void filter_in_place(const std::vector<Section>& sections, std::vector<double>& x) {
    if (x.empty()) return;
    const double x0 = x.front();
    for (const Section& s : sections) {
        auto [z1, z2] = s.steady_state(x0);
        for (double& v : x) {
            const double y = s.b0 * v + z1;
            z1 = s.b1 * v - s.a1 * y + z2;
            z2 = s.b2 * v - s.a2 * y;
            v = y;
        }
    }
}

} // namespace

std::string_view to_string(Unit u) noexcept {
    switch (u) {
    case Unit::rad: return "rad";
    case Unit::volt: return "V";
    case Unit::ampere: return "A";
    case Unit::tesla: return "T";
    case Unit::none: return "1";
    }
    return "1";
}

std::vector<double> TimeSeries::times() const {
    std::vector<double> t(values.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = time(i);
    return t;
}

void TimeSeries::validate() const {
    require(std::isfinite(dt) && dt > 0.0, ErrorCode::domain, "sample spacing dt must be positive");
    require(std::isfinite(t0), ErrorCode::domain, "start time must be finite");
    require(values.size() >= 2, ErrorCode::too_short, "a time series needs at least 2 samples");
    for (double v : values) require(std::isfinite(v), ErrorCode::domain, "time series contains a non-finite value");
}

double dominant_frequency(const TimeSeries& series) {
    series.validate();
    const std::size_t n = series.size();
    require(n >= 16, ErrorCode::too_short, "spectral peak estimation needs at least 16 samples");

    const auto raw = real_spectrum(series.values);
    double top = 0.0;
    for (std::size_t k = 1; k < raw.size(); ++k) top = std::max(top, std::abs(raw[k]));
    require(top > 1e-12 * std::abs(raw[0]), ErrorCode::flat_signal, "signal has no oscillatory content");

    double mean = 0.0;
    for (double v : series.values) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n)));
        x[i] = (series.values[i] - mean) * w;
    }
    const auto spec = real_spectrum(std::move(x));
    std::size_t peak = 1;
    for (std::size_t k = 2; k < spec.size(); ++k)
        if (std::abs(spec[k]) > std::abs(spec[peak])) peak = k;

    double offset = 0.0;
    if (peak + 1 < spec.size()) {
        const double a = std::log(std::abs(spec[peak - 1]) + 1e-300);
        const double b = std::log(std::abs(spec[peak]) + 1e-300);
        const double c = std::log(std::abs(spec[peak + 1]) + 1e-300);
        const double denom = a - 2.0 * b + c;
        if (denom < 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    }
    return (static_cast<double>(peak) + offset) / (static_cast<double>(n) * series.dt);
}

TimeSeries lowpass(const TimeSeries& series, double cutoff_hz) {
    series.validate();
    const double nyquist = 0.5 / series.dt;
    require(std::isfinite(cutoff_hz) && cutoff_hz > 0.0 && cutoff_hz < nyquist, ErrorCode::cutoff_out_of_range,
            "low-pass cutoff must lie in (0, Nyquist)");
    const auto sections = butterworth_sections(cutoff_hz, series.dt);

    const std::vector<double>& v = series.values;
    const std::size_t n = v.size();
    const std::size_t pad = std::min<std::size_t>(3 * 2 * butterworth_order, n - 1);
    std::vector<double> x;
    x.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) x.push_back(2.0 * v.front() - v[i]);
    x.insert(x.end(), v.begin(), v.end());
    for (std::size_t i = 1; i <= pad; ++i) x.push_back(2.0 * v.back() - v[n - 1 - i]);

    filter_in_place(sections, x);
    std::reverse(x.begin(), x.end());
    filter_in_place(sections, x);
    std::reverse(x.begin(), x.end());

    TimeSeries out = series;
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(pad), x.begin() + static_cast<std::ptrdiff_t>(pad + n),
              out.values.begin());
    return out;
}

CutoffChoice default_cutoff(const TimeSeries& series) {
    const double wanted = 100.0 * dominant_frequency(series);
    const double limit = 0.45 / series.dt;
    if (wanted < limit) return {wanted, false};
    return {limit, true};
}

std::vector<std::size_t> turning_points(const TimeSeries& series) {
    const double f = dominant_frequency(series);
    const auto half_width = static_cast<std::ptrdiff_t>(std::max(1.0, std::round(0.3 / (f * series.dt))));
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    const std::vector<double>& v = series.values;
    std::vector<std::size_t> out;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double a = std::abs(v[i]);
        // A window cut short on the right cannot confirm a peak.
        if (a == 0.0 || i + half_width > n - 1) continue;
        bool extreme = true;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half_width);
        const std::ptrdiff_t hi = i + half_width;
        for (std::ptrdiff_t j = lo; j <= hi && extreme; ++j) {
            // Ties go to the earliest sample.
            if (j < i ? std::abs(v[j]) >= a : std::abs(v[j]) > a) extreme = false;
        }
        if (extreme) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

TimeSeries trim_to_band(const TimeSeries& series, double upper, double lower) {
    require(std::isfinite(upper) && std::isfinite(lower) && lower > 0.0 && upper > lower, ErrorCode::domain,
            "trim band needs finite upper > lower > 0");
    const auto turns = turning_points(series);
    const auto first = std::find_if(turns.begin(), turns.end(),
                                    [&](std::size_t i) { return std::abs(series.values[i]) <= upper; });
    const auto last = std::find_if(turns.rbegin(), turns.rend(),
                                   [&](std::size_t i) { return std::abs(series.values[i]) >= lower; });
    require(first != turns.end() && last != turns.rend() && *first < *last, ErrorCode::band_not_found,
            "oscillation amplitude never spans the requested band");
    TimeSeries out;
    out.t0 = series.time(*first);
    out.dt = series.dt;
    out.unit = series.unit;
    out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(*first),
                      series.values.begin() + static_cast<std::ptrdiff_t>(*last) + 1);
    return out;
}

std::vector<double> derivative_weights(double x0, const std::vector<double>& x) {
    // Fornberg (1988), first derivative only.
    const std::size_t n = x.size();
    std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
    c[0][0] = 1.0;
    double c1 = 1.0;
    double c4 = x[0] - x0;
    for (std::size_t i = 1; i < n; ++i) {
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
    return w;
}

TimeSeries central_derivative(const TimeSeries& series, Stencil stencil) {
    series.validate();
    const std::size_t width = stencil == Stencil::two_point ? 2 : 8;
    const std::size_t n = series.size();
    require(n >= width + 1, ErrorCode::too_short, "series too short for the derivative stencil");
    const std::size_t half = width / 2;
    const std::size_t window = width + 1;
    const std::size_t edge = stencil == Stencil::two_point ? 3 : window;

    auto offsets = [](std::size_t from, std::size_t count) {
        std::vector<double> x(count);
        for (std::size_t j = 0; j < count; ++j) x[j] = static_cast<double>(from + j);
        return x;
    };
    const auto interior = derivative_weights(static_cast<double>(half), offsets(0, window));
    const std::vector<double>& v = series.values;
    TimeSeries out = series;
    out.unit = Unit::none;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        if (i >= half && i + half < n) {
            for (std::size_t j = 0; j < window; ++j) acc += interior[j] * v[i - half + j];
        } else {
            const std::size_t start = i < half ? 0 : n - edge;
            const auto w = derivative_weights(static_cast<double>(i - start), offsets(0, edge));
            for (std::size_t j = 0; j < edge; ++j) acc += w[j] * v[start + j];
        }
        out.values[i] = acc / series.dt;
    }
    return out;
}

} // namespace magspring
