#include "magspring/error.hpp"
#include "magspring/ode.hpp"
#include "magspring/ringdown.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace magspring;

namespace {

constexpr double pi = std::numbers::pi;

const NormalizedDamping rotor_damping = normalize({8.99e-6, 3.17e-6, 8.54e-5, 0.484});

double decrement(double zeta) { return pi * zeta / std::sqrt(1.0 - zeta * zeta); }

// Envelope recursion Theta_{k+1} = Theta_k e^{-delta} - 2 theta_f / sqrt(1 - zeta^2).
std::vector<double> iterate_envelope(double Theta1, double zeta, double theta_f, int count) {
    std::vector<double> out{Theta1};
    const double shrink = std::exp(-decrement(zeta));
    const double loss = 2.0 * theta_f / std::sqrt(1.0 - zeta * zeta);
    while (static_cast<int>(out.size()) < count) out.push_back(out.back() * shrink - loss);
    return out;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
    return t;
}

} // namespace

TEST_CASE("viscous response basics") {
    const RingdownModal m{2.0 * pi * 5.0, 0.0, 0.0, 0.3, 0.0};
    const std::vector<double> t{0.0, 0.2, 0.05};
    const auto y = viscous_response(m, t);
    CHECK(y[0] == 0.3);
    CHECK(y[1] == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(y[2] == doctest::Approx(0.3 * std::cos(0.5 * pi)).epsilon(1e-12));
}

TEST_CASE("viscous response decays by the logarithmic decrement per period") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> wn(1.0, 500.0), z(0.0, 0.9), amp(0.01, 2.0), ph(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const RingdownModal m{wn(rng), z(rng), 0.0, amp(rng), ph(rng)};
        const double T = 2.0 * pi / m.omega_d();
        const std::vector<double> t{0.37 * T, 1.37 * T};
        const auto y = viscous_response(m, t);
        if (std::abs(y[0]) < 1e-6) continue;
        const double expected = std::exp(-2.0 * pi * m.zeta / std::sqrt(1.0 - m.zeta * m.zeta));
        CHECK(y[1] / y[0] == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("release from rest in the undamped limit") {
    const NormalizedDamping d{2.0 * pi * 10.0, 0.0, 0.01};
    const HalfCycleSchedule s = build_schedule(d, 0.2, 0.0);
    CHECK(s.S0 == -1);
    CHECK(s.modal.phi0 == 0.0);
    CHECK(s.modal.Theta0 == doctest::Approx(0.2 - 0.01).epsilon(1e-15));
    CHECK(s.t1 == doctest::Approx(pi / d.omega_n).epsilon(1e-15));
    CHECK(combined_angle(s, 0.0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(combined_velocity(s, 0.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("schedule without dry friction reproduces the viscous parameters") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> z(0.0, 0.5), th(-1.0, 1.0), om(-50.0, 50.0);
    for (int i = 0; i < 200; ++i) {
        const NormalizedDamping d{2.0 * pi * 7.0, z(rng), 0.0};
        const double theta0 = th(rng), Omega0 = i % 4 == 0 ? 0.0 : om(rng);
        const HalfCycleSchedule s = build_schedule(d, theta0, Omega0);
        CHECK(s.modal.Theta0 * std::cos(s.modal.phi0) == doctest::Approx(theta0).epsilon(1e-12));
        const auto t = linspace(0.0, 1.0, 301);
        const auto a = combined_response(s, t);
        const auto v = viscous_response(s.modal, t);
        for (std::size_t j = 0; j < t.size(); ++j) CHECK(std::abs(a[j] - v[j]) < 1e-12);
    }
}

TEST_CASE("schedule reproduces the initial conditions") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> z(0.0, 0.3), f(0.0, 0.05), th(-1.0, 1.0), om(-80.0, 80.0);
    for (int i = 0; i < 300; ++i) {
        const NormalizedDamping d{2.0 * pi * 4.0, z(rng), f(rng)};
        const double theta0 = th(rng), Omega0 = i % 3 == 0 ? 0.0 : om(rng);
        if (Omega0 == 0.0 && std::abs(theta0) <= d.theta_f) continue;
        const HalfCycleSchedule s = build_schedule(d, theta0, Omega0);
        CHECK(s.z0 >= -2);
        CHECK(s.z0 <= 0);
        CHECK(s.t1 > 0.0);
        CHECK(s.t1 <= s.half_period() * (1.0 + 1e-12));
        CHECK(s.modal.phi0 > -pi);
        CHECK(s.modal.phi0 <= pi);
        CHECK(combined_angle(s, 0.0) == doctest::Approx(theta0).epsilon(1e-12).scale(1.0));
        CHECK(std::abs(combined_velocity(s, 0.0) - Omega0) < 1e-10 * (1.0 + std::abs(Omega0)));
    }
}

TEST_CASE("degenerate and at-rest starts") {
    CHECK_THROWS_AS(build_schedule(rotor_damping, 0.0, 0.0), Error);
    const HalfCycleSchedule s = build_schedule(rotor_damping, 0.5 * rotor_damping.theta_f, 0.0);
    REQUIRE(s.arrest_index.has_value());
    CHECK(*s.arrest_index == 0);
    for (double t : {0.0, 0.1, 10.0}) {
        CHECK(combined_angle(s, t) == 0.5 * rotor_damping.theta_f);
        CHECK(combined_velocity(s, t) == 0.0);
    }
}

TEST_CASE("envelope closed form equals the recursion") {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> z(0.0, 0.2), f(0.0, 2e-4);
    for (int i = 0; i < 100; ++i) {
        const NormalizedDamping d{2.0 * pi * 30.0, z(rng), f(rng)};
        const HalfCycleSchedule s = build_schedule(d, 0.3, 0.0);
        const auto ref = iterate_envelope(s.Theta1, d.zeta, d.theta_f, 200);
        const long last = s.arrest_index ? std::min<long>(200, *s.arrest_index - 1) : 200;
        for (long k = 1; k <= last; ++k) {
            const double got = envelope_amplitude(s, k);
            CHECK(std::abs(got - ref[k - 1]) <= 1e-12 * s.Theta1);
            CHECK(got >= 0.0);
        }
    }
}

TEST_CASE("envelope limits") {
    SUBCASE("no viscous damping: linear loss of 2 theta_f per half-cycle") {
        const NormalizedDamping d{2.0 * pi * 30.0, 0.0, 1e-3};
        const HalfCycleSchedule s = build_schedule(d, 0.3, 0.0);
        for (long k = 1; k < 100; ++k)
            CHECK(std::abs(envelope_amplitude(s, k) - (s.Theta1 - 2e-3 * (k - 1))) < 1e-13);
        for (long k = 1; k + 2 < 100; k += 2)
            CHECK(std::abs((envelope_amplitude(s, k) - envelope_amplitude(s, k + 2)) - 4e-3) < 1e-13);
    }
    SUBCASE("no dry friction: pure logarithmic decrement") {
        const NormalizedDamping d{2.0 * pi * 30.0, 0.01, 0.0};
        const HalfCycleSchedule s = build_schedule(d, 0.3, 0.0);
        for (long k = 1; k < 300; ++k)
            CHECK(envelope_amplitude(s, k) ==
                  doctest::Approx(s.Theta1 * std::exp(-(k - 1) * decrement(0.01))).epsilon(1e-13));
    }
}

TEST_CASE("envelope index beyond arrest is rejected") {
    const NormalizedDamping d{2.0 * pi * 30.0, 0.0, 1e-3};
    const HalfCycleSchedule s = build_schedule(d, 0.013, 0.0);
    REQUIRE(s.arrest_index.has_value());
    CHECK_THROWS_AS(envelope_amplitude(s, *s.arrest_index), Error);
    CHECK_THROWS_AS(envelope_amplitude(s, 0), Error);
}

TEST_CASE("arrest after the envelope crosses the friction band") {
    // Theta_1 = 10 theta_f: released from rest at 13 theta_f without viscous damping.
    const NormalizedDamping d{2.0 * pi * 30.0, 0.0, 1e-3};
    const HalfCycleSchedule s = build_schedule(d, 13e-3, 0.0);
    CHECK(s.Theta1 == doctest::Approx(10e-3).epsilon(1e-14));
    const auto ref = iterate_envelope(s.Theta1, 0.0, d.theta_f, 20);
    long brute = 1;
    while (ref[brute - 1] > 1e-15) ++brute;
    CHECK(brute == 6);
    REQUIRE(s.arrest_index.has_value());
    CHECK(*s.arrest_index == 6);
    const double rest = combined_angle(s, s.turn_time(6));
    CHECK(std::abs(rest) <= d.theta_f * (1.0 + 1e-12));
    CHECK(combined_angle(s, s.turn_time(6) + 5.0) == rest);
    CHECK(combined_velocity(s, s.turn_time(6) + 1e-3) == 0.0);
}

TEST_CASE("arrest index matches brute-force iteration") {
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> z(0.0, 0.2), f(1e-4, 0.05), th(0.05, 1.0);
    for (int i = 0; i < 200; ++i) {
        const NormalizedDamping d{2.0 * pi * 10.0, z(rng), f(rng)};
        const HalfCycleSchedule s = build_schedule(d, th(rng), 0.0);
        const auto ref = iterate_envelope(s.Theta1, d.zeta, d.theta_f, 100000);
        long brute = 1;
        while (ref[brute - 1] > 16.0 * std::numeric_limits<double>::epsilon() * s.Theta1) ++brute;
        REQUIRE(s.arrest_index.has_value());
        CHECK(*s.arrest_index == brute);
    }
}

TEST_CASE("no arrest without dry friction") {
    const NormalizedDamping d{2.0 * pi * 10.0, 0.05, 0.0};
    CHECK_FALSE(build_schedule(d, 0.3, 0.0).arrest_index.has_value());
    const NormalizedDamping undamped{2.0 * pi * 10.0, 0.0, 0.0};
    CHECK_FALSE(build_schedule(undamped, 0.3, 0.0, 1000).arrest_index.has_value());
}

TEST_CASE("half-cycle structure properties") {
    std::mt19937_64 rng(26);
    std::uniform_real_distribution<double> z(0.0, 0.2), f(0.0, 0.01), th(-1.0, 1.0), om(-40.0, 40.0);
    for (int i = 0; i < 100; ++i) {
        const NormalizedDamping d{2.0 * pi * 6.0, z(rng), f(rng)};
        const double theta0 = th(rng), Omega0 = i % 2 ? 0.0 : om(rng);
        if (Omega0 == 0.0 && std::abs(theta0) <= d.theta_f) continue;
        const HalfCycleSchedule s = build_schedule(d, theta0, Omega0);
        const long last = s.arrest_index ? std::min<long>(40, *s.arrest_index - 1) : 40;
        const double scale = d.omega_n * s.modal.Theta0;
        for (long k = 1; k <= last; ++k) {
            const double tk = s.turn_time(k);
            CHECK(std::abs((s.turn_time(k + 1) - tk) / s.half_period() - 1.0) < 1e-12);
            CHECK(s.sign(k + 1) == -s.sign(k));
            double next = s.phase(k) - s.sign(k) * pi;
            if (next <= -pi) next += 2.0 * pi;
            if (next > pi) next -= 2.0 * pi;
            CHECK(s.phase(k + 1) == doctest::Approx(next).epsilon(1e-14));
            CHECK(s.phase(k) > -pi);
            CHECK(s.phase(k) <= pi);
            CHECK(std::abs(half_cycle_velocity(s, k, tk)) <= 1e-10 * scale);
            CHECK(std::abs(half_cycle_velocity(s, k - 1, tk)) <= 1e-10 * scale);
            CHECK(std::abs(half_cycle_angle(s, k - 1, tk) - half_cycle_angle(s, k, tk)) < 1e-12);
            if (k + 1 <= last) CHECK(envelope_amplitude(s, k + 1) < envelope_amplitude(s, k));
        }
    }
}

TEST_CASE("half-cycle index counts completed turning points") {
    const NormalizedDamping d{2.0 * pi * 10.0, 0.01, 0.0};
    const HalfCycleSchedule s = build_schedule(d, 0.2, 0.0);
    CHECK(half_cycle_index(s, 0.0) == 0);
    CHECK(half_cycle_index(s, 0.5 * s.t1) == 0);
    CHECK(half_cycle_index(s, s.turn_time(1) + 1e-9) == 1);
    CHECK(half_cycle_index(s, s.turn_time(4) + 0.5 * s.half_period()) == 4);
}

TEST_CASE("damping beyond the validated range is flagged") {
    CHECK_FALSE(build_schedule({10.0, 0.2, 0.0}, 0.1, 0.0).beyond_validated_damping());
    CHECK(build_schedule({10.0, 0.3, 0.0}, 0.1, 0.0).beyond_validated_damping());
}

TEST_CASE("first turning point of the identified rotor agrees with direct integration") {
    const MechanicalParams p = denormalize(rotor_damping, 1.0);
    const double theta0 = 15.0 * pi / 180.0;
    const HalfCycleSchedule s = build_schedule(rotor_damping, theta0, 0.0);
    CHECK(s.t1 == doctest::Approx(0.013539641430674092).epsilon(1e-14));

    const Trajectory traj = integrate_free(p, theta0, 0.0, s.t1, SampleGrid{s.t1}, IntegratorSettings::oracle());
    REQUIRE(traj.size() == 2);
    const double theta_t1 = traj.theta.back();
    // Closed-form turning angle from Theta_1.
    const double expected = half_cycle_angle(s, 1, s.t1);
    CHECK(std::abs(theta_t1 - expected) < 1e-9);
    // Residual velocity over the local acceleration bounds the turning-time error.
    const double accel = rotor_damping.omega_n * rotor_damping.omega_n * std::abs(theta_t1);
    CHECK(std::abs(traj.omega.back()) / accel < 1e-9);
}

TEST_CASE("closed form matches event-driven integration on random parameters") {
    std::mt19937_64 rng(27);
    std::uniform_real_distribution<double> lz(std::log(1e-3), std::log(0.2)), ratio(0.0, 0.1);
    for (int trial = 0; trial < 12; ++trial) {
        const double zeta = std::exp(lz(rng));
        const double Theta0 = 0.2;
        const NormalizedDamping d{2.0 * pi * 20.0, zeta, ratio(rng) * Theta0};
        const MechanicalParams p = denormalize(d, 1e-5);
        const HalfCycleSchedule s = build_schedule(d, Theta0, 0.0);
        const double t_end = s.turn_time(10);
        const Trajectory traj =
            integrate_free(p, Theta0, 0.0, t_end, SampleGrid{t_end / 2000.0}, IntegratorSettings::oracle());
        const auto ref = combined_response(s, traj.times);
        double ss = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) ss += (ref[i] - traj.theta[i]) * (ref[i] - traj.theta[i]);
        CHECK(std::sqrt(ss / ref.size()) < 1e-8 * s.modal.Theta0);
    }
}
