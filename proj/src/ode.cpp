#include "magspring/ode.hpp"

#include "magspring/error.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace magspring {

namespace odeint = boost::numeric::odeint;

IntegratorSettings IntegratorSettings::oracle() {
    return {1e-9, 1e-12, 0.0, 1e-4, FrictionModel::event_exact};
}

IntegratorSettings IntegratorSettings::sweep() {
    return {1e-7, 1e-10, 0.0, 1e-4, FrictionModel::regularized};
}

void IntegratorSettings::validate() const {
    require(rel_tol > 0.0 && abs_tol > 0.0, ErrorCode::domain, "integrator tolerances must be positive");
    require(coulomb_epsilon > 0.0, ErrorCode::domain, "coulomb_epsilon must be positive");
    require(max_step >= 0.0, ErrorCode::domain, "max_step must be >= 0");
}

VoltageDrive VoltageDrive::harmonic(double amplitude, double frequency_hz) {
    const double w = 2.0 * std::numbers::pi * frequency_hz;
    return {[amplitude, w](double t) { return amplitude * std::cos(w * t); }};
}

VoltageDrive VoltageDrive::none() { return {}; }

namespace {

using State = std::array<double, 3>; // theta, omega, current
using Stepper = odeint::runge_kutta_fehlberg78<State>;
using Checker = odeint::default_error_checker<double, Stepper::algebra_type, Stepper::operations_type>;
using Controlled = odeint::controlled_runge_kutta<Stepper, Checker>;

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

enum class Phase { slide, stuck, smooth };

struct Plant {
    const MechanicalParams& p;
    const CoilParams* coil;
    const VoltageDrive* drive;
    SpringModel spring;
    double epsilon;

    double spring_torque(double theta) const {
        return spring == SpringModel::linear ? p.spring_amp * theta : p.spring_amp * std::sin(theta);
    }

    // Torque on the rotor excluding viscous and dry friction.
    double static_torque(const State& x) const {
        const double drive_torque = coil ? coil->k_torque * x[2] * std::cos(x[0]) : 0.0;
        return drive_torque - spring_torque(x[0]);
    }

    double current_rate(const State& x, double t) const {
        if (!coil) return 0.0;
        return ((*drive)(t) - coil->resistance * x[2] - coil->k_emf * x[1] * std::cos(x[0])) /
               coil->inductance;
    }
};

struct Rhs {
    const Plant* plant;
    Phase phase;
    int sign;

    void operator()(const State& x, State& dxdt, double t) const {
        const Plant& pl = *plant;
        if (phase == Phase::stuck) {
            dxdt[0] = 0.0;
            dxdt[1] = 0.0;
            dxdt[2] = pl.current_rate(x, t);
            return;
        }
        const double friction = phase == Phase::smooth
                                    ? pl.p.dry_friction * std::tanh(x[1] / pl.epsilon)
                                    : pl.p.dry_friction * sign;
        dxdt[0] = x[1];
        dxdt[1] = (pl.static_torque(x) - pl.p.viscous * x[1] - friction) / pl.p.inertia;
        dxdt[2] = pl.current_rate(x, t);
    }
};

class Recorder {
public:
    Recorder(const SampleGrid& grid, double t_end, bool with_current) : with_current_(with_current) {
        require(grid.sample_dt > 0.0, ErrorCode::domain, "sample spacing must be positive");
        require(grid.record_from >= 0.0 && grid.record_from <= t_end, ErrorCode::domain,
                "recording start must lie in [0, t_end]");
        start_ = grid.record_from;
        dt_ = grid.sample_dt;
        t_end_ = t_end;
        count_ = static_cast<std::size_t>(std::floor((t_end - start_) / dt_ + 1e-9)) + 1;
        out_.times.reserve(count_);
        out_.theta.reserve(count_);
        out_.omega.reserve(count_);
        if (with_current_) out_.current.reserve(count_);
    }

    bool done() const { return next_ >= count_; }

    double next_time() const {
        const double ts = start_ + static_cast<double>(next_) * dt_;
        return std::min(ts, t_end_);
    }

    void push(double t, const State& x) {
        out_.times.push_back(t);
        out_.theta.push_back(x[0]);
        out_.omega.push_back(x[1]);
        if (with_current_) out_.current.push_back(x[2]);
        ++next_;
    }

    // Samples in (t0, t1] from the state at t0 by re-stepping with the same rhs.
    void fill(const Rhs& rhs, Stepper& raw, double t0, const State& x0, double t1, const State& x1) {
        while (!done() && next_time() <= t1) {
            const double ts = next_time();
            if (ts == t1) {
                push(ts, x1);
            } else if (ts <= t0) {
                push(ts, x0);
            } else {
                State xs;
                raw.do_step(rhs, x0, t0, xs, ts - t0);
                push(ts, xs);
            }
        }
    }

    void hold(const State& x) {
        while (!done()) push(next_time(), x);
    }

    Trajectory take() { return std::move(out_); }
    Trajectory& trajectory() { return out_; }

private:
    bool with_current_;
    double start_ = 0.0, dt_ = 0.0, t_end_ = 0.0;
    std::size_t count_ = 0, next_ = 0;
    Trajectory out_;
};

// Locates the first root of g(h) on (0, H] given g(0) and g(H) of opposite sign.
template <class G>
double locate(G&& g, double H, double g0, double gH) {
    if (gH == 0.0) return H;
    if (g0 == 0.0) return 0.0;
    boost::uintmax_t iterations = 200;
    auto bracket = boost::math::tools::toms748_solve(g, 0.0, H, g0, gH,
                                                     boost::math::tools::eps_tolerance<double>(52),
                                                     iterations);
    return 0.5 * (bracket.first + bracket.second);
}

Trajectory run(const Plant& plant, State x, double t_end, const SampleGrid& grid,
               const IntegratorSettings& settings) {
    settings.validate();
    require(std::isfinite(t_end) && t_end > 0.0, ErrorCode::domain, "t_end must be positive");
    const bool event_exact = settings.friction == FrictionModel::event_exact;
    const MechanicalParams& p = plant.p;

    Recorder rec(grid, t_end, plant.coil != nullptr);
    Stepper raw;
    Controlled ctrl(Checker(settings.abs_tol, settings.rel_tol, 1.0, 0.0));

    Rhs rhs{&plant, Phase::smooth, 0};
    auto settle = [&](const State& s) {
        // Decide the friction phase at a zero-velocity state.
        const double torque = plant.static_torque(s);
        if (std::abs(torque) <= p.dry_friction) {
            rhs.phase = Phase::stuck;
        } else {
            rhs.phase = Phase::slide;
            rhs.sign = sgn(torque);
        }
    };
    if (event_exact) {
        if (x[1] != 0.0) {
            rhs.phase = Phase::slide;
            rhs.sign = sgn(x[1]);
        } else {
            settle(x);
        }
    }

    double t = 0.0;
    rec.fill(rhs, raw, t, x, t, x);

    const double omega_n = std::sqrt(p.spring_amp / p.inertia);
    double dt = 1e-3 * 2.0 * std::numbers::pi / omega_n;
    if (plant.coil) dt = std::min(dt, 0.1 * plant.coil->inductance / plant.coil->resistance);
    if (settings.max_step > 0.0) dt = std::min(dt, settings.max_step);

    long same_time_events = 0;
    while (t < t_end) {
        if (rhs.phase == Phase::stuck && !plant.coil) {
            rec.trajectory().arrest_time = t;
            rec.hold(x);
            break;
        }
        double h = std::min(dt, t_end - t);
        if (settings.max_step > 0.0) h = std::min(h, settings.max_step);
        const double h_min = 8.0 * std::numeric_limits<double>::epsilon() * std::max(t, 1e-3 * t_end);
        if (h < h_min && t + h < t_end) {
            fail(ErrorCode::step_underflow,
                 "integrator step size underflow at t = " + std::to_string(t));
        }

        const State x0 = x;
        const double t0 = t;
        if (ctrl.try_step(rhs, x, t, h) == odeint::fail) {
            dt = h;
            if (dt < h_min) {
                fail(ErrorCode::step_underflow,
                     "integrator step size underflow at t = " + std::to_string(t));
            }
            continue;
        }
        // try_step caps growth; remember the suggestion but never exceed the span to t_end.
        const double h_next = h;
        const double taken = t - t0;

        bool event = false;
        double g0 = 0.0, g1 = 0.0;
        std::function<double(double)> g;
        if (event_exact && rhs.phase == Phase::slide) {
            g0 = rhs.sign * x0[1];
            g1 = rhs.sign * x[1];
            if (g1 <= 0.0) {
                if (g0 <= 0.0) {
                    // Reversal within the first step of a sliding phase: shorten the step.
                    x = x0;
                    t = t0;
                    dt = 0.5 * taken;
                    continue;
                }
                event = true;
                g = [&](double hh) {
                    State xs;
                    raw.do_step(rhs, x0, t0, xs, hh);
                    return rhs.sign * xs[1];
                };
            }
        } else if (event_exact && rhs.phase == Phase::stuck) {
            g0 = std::abs(plant.static_torque(x0)) - p.dry_friction;
            g1 = std::abs(plant.static_torque(x)) - p.dry_friction;
            if (g1 > 0.0) {
                event = true;
                g = [&](double hh) {
                    State xs;
                    raw.do_step(rhs, x0, t0, xs, hh);
                    return std::abs(plant.static_torque(xs)) - p.dry_friction;
                };
            }
        }

        if (!event) {
            rec.fill(rhs, raw, t0, x0, t, x);
            dt = h_next;
            continue;
        }

        const double he = locate(g, taken, g0, g1);
        State xe = x0;
        if (he > 0.0) raw.do_step(rhs, x0, t0, xe, he);
        const double te = t0 + he;
        rec.fill(rhs, raw, t0, x0, te, xe);
        if (rhs.phase == Phase::slide) xe[1] = 0.0;
        const Phase before = rhs.phase;
        settle(xe);
        if (before == Phase::stuck && rhs.phase == Phase::stuck) {
            // Torque hovers at the friction threshold; leave in the torque direction.
            rhs.phase = Phase::slide;
            rhs.sign = sgn(plant.static_torque(xe));
        }
        x = xe;
        t = te;
        ++rec.trajectory().events;
        same_time_events = he == 0.0 ? same_time_events + 1 : 0;
        require(same_time_events < 100, ErrorCode::no_convergence,
                "friction switching chatters without time advance");
        dt = std::max(h_next, 1e-6 * 2.0 * std::numbers::pi / omega_n);
    }
    rec.hold(x);
    return rec.take();
}

} // namespace

Trajectory integrate_free(const MechanicalParams& p, double theta0, double Omega0, double t_end,
                          const SampleGrid& grid, const IntegratorSettings& settings,
                          SpringModel spring) {
    p.validate();
    require(std::isfinite(theta0) && std::isfinite(Omega0), ErrorCode::domain,
            "initial conditions must be finite");
    const Plant plant{p, nullptr, nullptr, spring, settings.coulomb_epsilon};
    return run(plant, State{theta0, Omega0, 0.0}, t_end, grid, settings);
}

Trajectory integrate_coupled(const MechanicalParams& p, const CoilParams& coil,
                             const VoltageDrive& drive, const CoupledState& ic, double t_end,
                             const SampleGrid& grid, const IntegratorSettings& settings,
                             SpringModel spring) {
    p.validate();
    coil.validate();
    const Plant plant{p, &coil, &drive, spring, settings.coulomb_epsilon};
    return run(plant, State{ic.theta, ic.omega, ic.current}, t_end, grid, settings);
}

} // namespace magspring
