#include "magspring/fit.hpp"

#include "magspring/error.hpp"
#include "magspring/least_squares.hpp"
#include "magspring/ringdown.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace magspring {

namespace {

constexpr double pi = std::numbers::pi;

double wrap_phase(double phi) {
    phi = std::remainder(phi, 2.0 * pi);
    return phi <= -pi ? phi + 2.0 * pi : phi;
}

enum class Model { viscous, combined };

// Parameter layout: viscous (omega_n, zeta, Theta0, phi0), combined
// (omega_n, zeta, theta_f, Theta0, phi0).
RingdownModal to_modal(Model m, const Eigen::VectorXd& x) {
    RingdownModal out{};
    out.omega_n = x[0];
    out.zeta = x[1];
    out.theta_f = m == Model::combined ? x[2] : 0.0;
    double amp = m == Model::combined ? x[3] : x[2];
    double phi = m == Model::combined ? x[4] : x[3];
    if (amp < 0.0) {
        amp = -amp;
        phi += pi;
    }
    out.Theta0 = amp;
    out.phi0 = wrap_phase(phi);
    return out;
}

Eigen::VectorXd from_modal(Model m, const RingdownModal& r) {
    if (m == Model::viscous) return Eigen::Vector4d(r.omega_n, r.zeta, r.Theta0, r.phi0);
    Eigen::VectorXd x(5);
    x << r.omega_n, r.zeta, r.theta_f, r.Theta0, r.phi0;
    return x;
}

struct Fitter {
    Model model;
    const TimeSeries& data;
    double omega_floor;
    double omega_ceiling; // Nyquist: faster modes alias onto the samples

    void project(Eigen::VectorXd& x) const {
        x[0] = std::clamp(x[0], omega_floor, omega_ceiling);
        x[1] = std::clamp(x[1], 0.0, 0.99);
        if (model == Model::combined) x[2] = std::max(x[2], 0.0);
    }

    void residual(const Eigen::VectorXd& x, Eigen::Index count, Eigen::VectorXd& r) const {
        const RingdownModal m = to_modal(model, x);
        if (model == Model::viscous) {
            const double wd = m.omega_d(), decay = m.zeta * m.omega_n;
            for (Eigen::Index i = 0; i < count; ++i) {
                const double t = static_cast<double>(i) * data.dt;
                r[i] = m.Theta0 * std::exp(-decay * t) * std::cos(wd * t + m.phi0) - data.values[i];
            }
            return;
        }
        const HalfCycleSchedule s = make_schedule(m);
        for (Eigen::Index i = 0; i < count; ++i)
            r[i] = combined_angle(s, static_cast<double>(i) * data.dt) - data.values[i];
    }

    void viscous_jacobian(const Eigen::VectorXd& x, Eigen::Index count, Eigen::MatrixXd& jac) const {
        const RingdownModal m = to_modal(Model::viscous, x);
        const double q = std::sqrt(1.0 - m.zeta * m.zeta);
        const double wd = m.omega_n * q;
        // d/dTheta0 and d/dphi0 are taken w.r.t. the raw (unwrapped) coordinates.
        const double sign = x[2] < 0.0 ? -1.0 : 1.0;
        for (Eigen::Index i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) * data.dt;
            const double e = std::exp(-m.zeta * m.omega_n * t);
            const double arg = wd * t + m.phi0;
            const double c = std::cos(arg), s = std::sin(arg);
            jac(i, 0) = m.Theta0 * e * t * (-m.zeta * c - q * s);
            jac(i, 1) = m.Theta0 * e * m.omega_n * t * (-c + s * m.zeta / q);
            jac(i, 2) = sign * e * c;
            jac(i, 3) = -m.Theta0 * e * s;
        }
    }

    LeastSquaresProblem problem(Eigen::Index count, const Eigen::VectorXd& scale) const {
        LeastSquaresProblem pb;
        pb.residual_count = count;
        pb.residual = [this, count](const Eigen::VectorXd& x, Eigen::VectorXd& r) { residual(x, count, r); };
        if (model == Model::viscous) {
            pb.jacobian = [this, count](const Eigen::VectorXd& x, Eigen::MatrixXd& j) {
                viscous_jacobian(x, count, j);
            };
        }
        pb.project = [this](Eigen::VectorXd& x) { project(x); };
        pb.scale = scale;
        return pb;
    }
};

struct Start {
    Eigen::VectorXd x;
    double sse = 0.0;
    bool converged = false;
};

// Linear least squares of the first period against e^{-zeta omega_n t} (a cos + b sin).
std::pair<double, double> initial_phasor(const TimeSeries& data, double omega_d, double decay) {
    const auto count = std::min<std::size_t>(
        data.size(), static_cast<std::size_t>(std::ceil(2.0 * pi / (omega_d * data.dt))) + 1);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(count), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) * data.dt;
        const double e = std::exp(-decay * t);
        a(static_cast<Eigen::Index>(i), 0) = e * std::cos(omega_d * t);
        a(static_cast<Eigen::Index>(i), 1) = e * std::sin(omega_d * t);
        y[static_cast<Eigen::Index>(i)] = data.values[i];
    }
    const Eigen::Vector2d ab = a.colPivHouseholderQr().solve(y);
    return {std::hypot(ab[0], ab[1]), std::atan2(-ab[1], ab[0])};
}

// Start from the spectral peak and the sequence of turning-point magnitudes,
// which obey A_{j+1} = e^{-delta} A_j - theta_f (1 + e^{-delta}).
RingdownModal heuristic_start(Model model, const TimeSeries& data, double f_peak) {
    const auto turns = turning_points(data);
    double delta = 0.0, theta_f = 0.0;
    if (turns.size() >= 3 && model == Model::viscous) {
        // log A_j = log A_0 - j delta.
        const auto rows = static_cast<Eigen::Index>(turns.size());
        Eigen::MatrixXd a(rows, 2);
        Eigen::VectorXd y(rows);
        for (Eigen::Index j = 0; j < rows; ++j) {
            a(j, 0) = 1.0;
            a(j, 1) = static_cast<double>(j);
            y[j] = std::log(std::abs(data.values[turns[static_cast<std::size_t>(j)]]));
        }
        const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
        delta = std::max(0.0, -c[1]);
    } else if (turns.size() >= 3) {
        const auto rows = static_cast<Eigen::Index>(turns.size() - 1);
        Eigen::MatrixXd a(rows, 2);
        Eigen::VectorXd y(rows);
        for (Eigen::Index j = 0; j < rows; ++j) {
            a(j, 0) = std::abs(data.values[turns[static_cast<std::size_t>(j)]]);
            a(j, 1) = -1.0;
            y[j] = std::abs(data.values[turns[static_cast<std::size_t>(j) + 1]]);
        }
        const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
        const double shrink = std::clamp(c[0], 1e-6, 1.0);
        delta = -std::log(shrink);
        theta_f = std::max(0.0, c[1] / (1.0 + shrink));
    }
    const double zeta = std::min(0.9, delta / std::sqrt(pi * pi + delta * delta));
    const double omega_d = 2.0 * pi * f_peak;
    const double omega_n = omega_d / std::sqrt(1.0 - zeta * zeta);
    const auto [amp, phi] = initial_phasor(data, omega_d, zeta * omega_n);
    return {omega_n, zeta, theta_f, amp, wrap_phase(phi)};
}

double sum_sq_dev(const std::vector<double>& y) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double s = 0.0;
    for (double v : y) s += (v - mean) * (v - mean);
    return s;
}

FitReport fit_model(Model model, const TimeSeries& data, const FitOptions& opt) {
    data.validate();
    require(opt.n_starts >= 1, ErrorCode::domain, "n_starts must be >= 1");
    const Eigen::Index n_params = model == Model::combined ? 5 : 4;
    require(data.size() >= static_cast<std::size_t>(4 * n_params), ErrorCode::underdetermined,
            "ringdown fit needs more samples");

    const double f_peak = dominant_frequency(data);
    double peak = 0.0;
    for (double v : data.values) peak = std::max(peak, std::abs(v));
    const double omega_guess = 2.0 * pi * f_peak;

    std::vector<Start> starts;
    starts.push_back({from_modal(model, heuristic_start(model, data, f_peak))});
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int k = 1; k < opt.n_starts; ++k) {
        RingdownModal r{};
        r.omega_n = omega_guess * (0.8 + 0.4 * u01(rng));
        r.zeta = 1e-5 + (0.5 - 1e-5) * u01(rng);
        r.Theta0 = peak * (0.5 + 1.5 * u01(rng));
        r.phi0 = pi - 2.0 * pi * u01(rng); // (-pi, pi]
        r.theta_f = model == Model::combined ? 0.25 * peak * u01(rng) : 0.0;
        starts.push_back({from_modal(model, r)});
    }

    Eigen::VectorXd scale = from_modal(model, {omega_guess, 0.01, 0.01 * peak, peak, 1.0});
    const Fitter fitter{model, data, 1e-3 * omega_guess, pi / data.dt};

    // Windowed continuation: fit 4 periods, then 4x longer windows, so that a
    // frequency error cannot wrap the phase over the full record.
    const auto total = static_cast<Eigen::Index>(data.size());
    const double period_samples = 1.0 / (f_peak * data.dt);
    std::vector<Eigen::Index> windows;
    for (double periods = 4.0;; periods *= 4.0) {
        const auto w = static_cast<Eigen::Index>(std::ceil(periods * period_samples)) + 1;
        if (w >= total) break;
        if (w >= 4 * n_params) windows.push_back(w);
    }
    windows.push_back(total);

    std::vector<std::size_t> alive(starts.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    for (std::size_t stage = 0; stage < windows.size(); ++stage) {
        const bool last = stage + 1 == windows.size();
        LevenbergMarquardtOptions lm;
        lm.max_iterations = last ? 200 : 100;
        const LeastSquaresProblem pb = fitter.problem(windows[stage], scale);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i : alive) {
            Start& s = starts[i];
            const LevenbergMarquardtResult res = levenberg_marquardt(pb, s.x, lm);
            s.x = res.x;
            s.sse = res.sse;
            s.converged = res.converged;
            best = std::min(best, s.sse);
        }
        if (last) break;
        // Carry forward only starts within a decade of the best at this window.
        std::vector<std::size_t> keep;
        for (std::size_t i : alive)
            if (starts[i].sse <= 10.0 * best + 1e-300) keep.push_back(i);
        alive.swap(keep);
    }

    std::size_t winner = alive.front();
    for (std::size_t i : alive)
        if (starts[i].sse < starts[winner].sse) winner = i;
    bool any_converged = false;
    for (std::size_t i : alive) any_converged = any_converged || starts[i].converged;

    const RingdownModal m = to_modal(model, starts[winner].x);
    FitReport rep;
    rep.model = model == Model::combined ? "combined" : "viscous";
    rep.parameters.push_back({"omega_n", m.omega_n, "rad/s"});
    rep.parameters.push_back({"zeta", m.zeta, "1"});
    if (model == Model::combined) rep.parameters.push_back({"theta_f", m.theta_f, "rad"});
    rep.parameters.push_back({"Theta0", m.Theta0, "rad"});
    rep.parameters.push_back({"phi0", m.phi0, "rad"});
    rep.sse = starts[winner].sse;
    const double sst = sum_sq_dev(data.values);
    rep.r_squared = sst > 0.0 ? 1.0 - rep.sse / sst : 0.0;
    rep.n_starts_used = static_cast<int>(starts.size());
    rep.converged = any_converged;
    if (!any_converged) rep.notes.push_back("no start met the convergence tolerance within 200 iterations");
    if (m.zeta > validated_zeta_limit)
        rep.notes.push_back("fitted zeta exceeds the range validated against direct integration");
    return rep;
}

} // namespace

double FitReport::value(std::string_view name) const {
    for (const FitParameter& p : parameters)
        if (p.name == name) return p.value;
    fail(ErrorCode::out_of_range, "fit report has no parameter '" + std::string(name) + "'");
}

RingdownModal FitReport::modal() const {
    const double theta_f = model == "combined" ? value("theta_f") : 0.0;
    return {value("omega_n"), value("zeta"), theta_f, value("Theta0"), value("phi0")};
}

FitReport fit_viscous_model(const TimeSeries& series, const FitOptions& options) {
    return fit_model(Model::viscous, series, options);
}

FitReport fit_combined_model(const TimeSeries& series, const FitOptions& options) {
    return fit_model(Model::combined, series, options);
}

Preprocessed preprocess_ringdown(const TimeSeries& raw, const PreprocessOptions& options) {
    raw.validate();
    Preprocessed out{raw, {}};
    if (options.filter) {
        double cutoff;
        if (options.cutoff_hz) {
            cutoff = *options.cutoff_hz;
        } else {
            const CutoffChoice c = default_cutoff(raw);
            cutoff = c.cutoff_hz;
            if (c.clamped) {
                std::ostringstream note;
                note << "low-pass cutoff clamped to 0.45/dt = " << cutoff << " Hz";
                out.notes.push_back(note.str());
            }
        }
        out.series = lowpass(raw, cutoff);
    }
    if (options.trim) out.series = trim_to_band(out.series, options.upper, options.lower);
    return out;
}

RingdownFits fit_ringdown(const TimeSeries& raw, const PreprocessOptions& pre, const FitOptions& options) {
    Preprocessed p = preprocess_ringdown(raw, pre);
    RingdownFits out{p.series, fit_viscous_model(p.series, options), fit_combined_model(p.series, options)};
    for (FitReport* r : {&out.viscous, &out.combined})
        r->notes.insert(r->notes.begin(), p.notes.begin(), p.notes.end());
    return out;
}

} // namespace magspring
