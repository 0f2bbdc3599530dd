#include "magspring/sweep.hpp"

#include "magspring/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace magspring {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr int lagrange_nodes = 10;

double lagrange_at(const std::vector<double>& times, const std::vector<double>& values, double dt, double t) {
    const auto n = static_cast<long>(values.size());
    long first = static_cast<long>(std::floor((t - times.front()) / dt)) - lagrange_nodes / 2 + 1;
    first = std::clamp(first, 0L, n - lagrange_nodes);
    double acc = 0.0;
    for (long j = first; j < first + lagrange_nodes; ++j) {
        double w = 1.0;
        const double xj = times.front() + static_cast<double>(j) * dt;
        for (long k = first; k < first + lagrange_nodes; ++k) {
            if (k == j) continue;
            const double xk = times.front() + static_cast<double>(k) * dt;
            w *= (t - xk) / (xj - xk);
        }
        acc += w * values[static_cast<std::size_t>(j)];
    }
    return acc;
}

HarmonicEstimate bin(const double* t, const double* v, std::size_t n, double f_hz) {
    std::complex<double> x = 0.0;
    for (std::size_t j = 0; j < n; ++j) x += v[j] * std::polar(1.0, -two_pi * f_hz * t[j]);
    return {2.0 * std::abs(x) / static_cast<double>(n), std::arg(x)};
}

double wrap_phase(double a) {
    a = std::remainder(a, two_pi);
    return a <= -std::numbers::pi ? a + two_pi : a;
}

} // namespace

std::string_view to_string(SweepDirection d) noexcept {
    return d == SweepDirection::forward ? "forward" : "backward";
}

std::string_view to_string(Nonlinearity n) noexcept {
    switch (n) {
    case Nonlinearity::softening: return "softening";
    case Nonlinearity::stiffening_then_softening: return "stiffening-then-softening";
    case Nonlinearity::linear: return "linear";
    case Nonlinearity::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

void DriveSchedule::validate() const {
    require(!points.empty(), ErrorCode::domain, "drive schedule is empty");
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& pt = points[k];
        require(std::isfinite(pt.f_hz) && pt.f_hz > 0.0, ErrorCode::domain, "drive frequencies must be positive");
        require(std::isfinite(pt.u_amp) && pt.u_amp >= 0.0, ErrorCode::domain, "drive amplitudes must be >= 0");
        if (k == 0) continue;
        const bool ok = direction == SweepDirection::forward ? pt.f_hz > points[k - 1].f_hz
                                                             : pt.f_hz < points[k - 1].f_hz;
        require(ok, ErrorCode::domain, "drive frequencies must be strictly monotone in the sweep direction");
    }
}

DriveSchedule DriveSchedule::uniform(double f_lo, double f_hi, double step_hz, double u_amp, SweepDirection d) {
    require(f_lo > 0.0 && f_hi >= f_lo && step_hz > 0.0, ErrorCode::domain, "need 0 < f_lo <= f_hi and step > 0");
    const auto n = static_cast<long>(std::floor((f_hi - f_lo) / step_hz + 1e-9)) + 1;
    DriveSchedule s{{}, d};
    for (long k = 0; k < n; ++k) s.points.push_back({f_lo + static_cast<double>(k) * step_hz, u_amp});
    if (d == SweepDirection::backward) std::reverse(s.points.begin(), s.points.end());
    s.validate();
    return s;
}

void SweepSettings::validate() const {
    integrator.validate();
    require(n_fft >= 2 && n_fft % 2 == 0, ErrorCode::config, "n_fft must be an even number >= 2");
    require(min_transient >= 0 && time_constants >= 0.0, ErrorCode::config, "transient settings must be >= 0");
    require(!n_transient || *n_transient >= 0, ErrorCode::config, "n_transient must be >= 0");
    require(samples_per_cycle >= 8, ErrorCode::config, "samples_per_cycle must be >= 8");
    require(settle_tol > 0.0, ErrorCode::config, "settle_tol must be positive");
}

int SweepSettings::transient_cycles(const MechanicalParams& p, double f_hz) const {
    if (n_transient) return *n_transient;
    const double decay = p.viscous / (2.0 * p.inertia); // zeta omega_n
    if (decay <= 0.0) return min_transient;
    return std::max(min_transient, static_cast<int>(std::ceil(time_constants * f_hz / decay)));
}

HarmonicEstimate steady_state_amplitude(const std::vector<double>& times, const std::vector<double>& values,
                                        double f_hz, int n_cycles) {
    require(std::isfinite(f_hz) && f_hz > 0.0, ErrorCode::domain, "drive frequency must be positive");
    require(n_cycles >= 1, ErrorCode::domain, "n_cycles must be >= 1");
    require(times.size() == values.size(), ErrorCode::mismatched_grid, "times and values differ in length");
    require(times.size() >= 2, ErrorCode::window_too_short, "trajectory has fewer than two samples");
    const std::size_t n = times.size();
    const double dt = (times.back() - times.front()) / static_cast<double>(n - 1);
    const double per_cycle = 1.0 / (f_hz * dt);
    const double rounded = std::round(per_cycle);
    if (rounded >= 2.0 && std::abs(per_cycle - rounded) <= 1e-9 * per_cycle) {
        const auto m = static_cast<std::size_t>(rounded) * static_cast<std::size_t>(n_cycles);
        require(m <= n, ErrorCode::window_too_short, "trajectory is shorter than the analysis window");
        return bin(times.data() + (n - m), values.data() + (n - m), m, f_hz);
    }
    require(n >= static_cast<std::size_t>(lagrange_nodes), ErrorCode::window_too_short,
            "too few samples to resample the analysis window");
    const double start = times.back() - n_cycles / f_hz;
    require(start >= times.front() - 1e-12 * std::abs(times.back()), ErrorCode::window_too_short,
            "trajectory is shorter than the analysis window");
    const int m_cycle = std::max(32, static_cast<int>(std::ceil(per_cycle)));
    const std::size_t m = static_cast<std::size_t>(m_cycle) * static_cast<std::size_t>(n_cycles);
    std::vector<double> t(m), v(m);
    for (std::size_t j = 0; j < m; ++j) {
        t[j] = start + static_cast<double>(j) / (m_cycle * f_hz);
        v[j] = lagrange_at(times, values, dt, t[j]);
    }
    return bin(t.data(), v.data(), m, f_hz);
}

HarmonicEstimate steady_state_amplitude(const Trajectory& traj, double f_hz, int n_cycles) {
    return steady_state_amplitude(traj.times, traj.theta, f_hz, n_cycles);
}

SweepResult run_sweep(const MechanicalParams& p, const CoilParams& coil, const DriveSchedule& schedule,
                      const SweepSettings& settings, std::string drive_label) {
    p.validate();
    coil.validate();
    schedule.validate();
    settings.validate();
    SweepResult out{schedule.direction, std::move(drive_label), {}};
    // Continuation restart: theta(0) = previous amplitude, theta'(0) = 0,
    // i(0) = 0, with the drive restarted at the phase where the previous
    // steady orbit reached +theta_amp.
    double carried = 0.0;
    double drive_phase = 0.0;
    for (const DrivePoint& pt : schedule.points) {
        SweepPoint rec{pt.f_hz, pt.u_amp, 0.0, 0.0, 0.0, false};
        const int n_tr = settings.transient_cycles(p, pt.f_hz);
        const double period = 1.0 / pt.f_hz;
        const double t_end = (n_tr + settings.n_fft) * period;
        const SampleGrid grid{period / settings.samples_per_cycle, n_tr * period};
        try {
            const double w = two_pi * pt.f_hz, u = pt.u_amp, psi = drive_phase;
            const VoltageDrive drive{[w, u, psi](double t) { return u * std::cos(w * t + psi); }};
            const Trajectory tr = integrate_coupled(p, coil, drive, CoupledState{carried, 0.0, 0.0}, t_end, grid,
                                                    settings.integrator, settings.spring);
            const HarmonicEstimate th = steady_state_amplitude(tr.times, tr.theta, pt.f_hz, settings.n_fft);
            const HarmonicEstimate cur = steady_state_amplitude(tr.times, tr.current, pt.f_hz, settings.n_fft);
            // Settling check: the two halves of the window must agree.
            const std::size_t half = static_cast<std::size_t>(settings.samples_per_cycle * settings.n_fft / 2);
            const std::size_t n = tr.size();
            const std::vector<double> t1(tr.times.end() - 2 * half, tr.times.end() - half);
            const std::vector<double> v1(tr.theta.end() - 2 * half, tr.theta.end() - half);
            const double a1 = steady_state_amplitude(t1, v1, pt.f_hz, settings.n_fft / 2).amplitude;
            const std::vector<double> t2(tr.times.begin() + static_cast<long>(n - half), tr.times.end());
            const std::vector<double> v2(tr.theta.begin() + static_cast<long>(n - half), tr.theta.end());
            const double a2 = steady_state_amplitude(t2, v2, pt.f_hz, settings.n_fft / 2).amplitude;
            rec.theta_amp = th.amplitude;
            rec.theta_phase = wrap_phase(th.phase - psi);
            rec.i_amp = cur.amplitude;
            rec.converged = std::abs(a2 - a1) <= settings.settle_tol * std::max(th.amplitude, 1e-12);
            carried = th.amplitude;
            drive_phase = th.amplitude > 0.0 ? wrap_phase(-rec.theta_phase) : 0.0;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::step_underflow && e.code() != ErrorCode::no_convergence) throw;
        }
        out.points.push_back(rec);
    }
    return out;
}

std::vector<BackbonePoint> extract_backbone(const std::vector<SweepResult>& sweeps) {
    std::vector<BackbonePoint> out;
    for (const SweepResult& s : sweeps) {
        auto it = std::find_if(out.begin(), out.end(), [&](const BackbonePoint& b) { return b.drive_label == s.drive_label; });
        if (it == out.end()) {
            out.push_back({s.drive_label, 0.0, -1.0});
            it = out.end() - 1;
        }
        for (const SweepPoint& pt : s.points)
            if (pt.theta_amp > it->theta_peak) {
                it->theta_peak = pt.theta_amp;
                it->f_peak = pt.f_hz;
            }
    }
    std::erase_if(out, [](const BackbonePoint& b) { return b.theta_peak < 0.0; });
    return out;
}

Nonlinearity classify_nonlinearity(std::vector<BackbonePoint> backbone, double tol_hz) {
    require(tol_hz > 0.0, ErrorCode::domain, "classification tolerance must be positive");
    if (backbone.size() < 2) return Nonlinearity::inconclusive;
    std::stable_sort(backbone.begin(), backbone.end(),
                     [](const BackbonePoint& a, const BackbonePoint& b) { return a.theta_peak < b.theta_peak; });
    std::vector<int> signs;
    for (std::size_t k = 1; k < backbone.size(); ++k) {
        const double d = backbone[k].f_peak - backbone[k - 1].f_peak;
        // Slight slack absorbs round-off in grid frequencies.
        if (d >= tol_hz * (1.0 - 1e-6)) signs.push_back(1);
        else if (d <= -tol_hz * (1.0 - 1e-6)) signs.push_back(-1);
    }
    if (signs.empty()) return Nonlinearity::linear;
    const auto first_neg = std::find(signs.begin(), signs.end(), -1);
    const bool all_neg_after = std::all_of(first_neg, signs.end(), [](int s) { return s == -1; });
    if (!all_neg_after || first_neg == signs.end()) return Nonlinearity::inconclusive;
    return first_neg == signs.begin() ? Nonlinearity::softening : Nonlinearity::stiffening_then_softening;
}

JumpReport detect_jumps(const SweepResult& forward, const SweepResult& backward, double jump_fraction) {
    require(forward.points.size() >= 2 && forward.points.size() == backward.points.size(), ErrorCode::mismatched_grid,
            "sweeps must cover the same frequencies");
    std::vector<double> ff, fb;
    for (const auto& p : forward.points) ff.push_back(p.f_hz);
    for (const auto& p : backward.points) fb.push_back(p.f_hz);
    std::sort(ff.begin(), ff.end());
    std::sort(fb.begin(), fb.end());
    double step = INFINITY;
    for (std::size_t k = 0; k < ff.size(); ++k) {
        require(std::abs(ff[k] - fb[k]) <= 1e-9 * ff[k], ErrorCode::mismatched_grid,
                "sweeps must cover the same frequencies");
        if (k > 0) step = std::min(step, ff[k] - ff[k - 1]);
    }
    struct Jump {
        double f, delta;
        bool significant;
    };
    const auto largest = [&](const SweepResult& s) {
        Jump j{0.0, 0.0, false};
        double peak = 0.0;
        for (std::size_t k = 0; k < s.points.size(); ++k) {
            peak = std::max(peak, s.points[k].theta_amp);
            if (k == 0) continue;
            const double d = s.points[k].theta_amp - s.points[k - 1].theta_amp;
            if (std::abs(d) > std::abs(j.delta)) j = {0.5 * (s.points[k].f_hz + s.points[k - 1].f_hz), d, false};
        }
        j.significant = peak > 0.0 && std::abs(j.delta) >= jump_fraction * peak;
        return j;
    };
    const Jump a = largest(forward), b = largest(backward);
    const bool apart = std::abs(a.f - b.f) > step * (1.0 + 1e-6);
    return {a.f, b.f, a.delta, b.delta, a.significant && b.significant && apart};
}

} // namespace magspring
