#include "magspring/error.hpp"
#include "magspring/model.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

using namespace magspring;

namespace {

constexpr double pi = std::numbers::pi;

// N45 stator block 76.2 x 12.7 x 12.7 mm.
const MagnetGeometry stator{76.2e-3, 12.7e-3, 12.7e-3, 1.35};
// Rotor block 50.8 x 12.7 x 12.7 mm.
const MagnetGeometry rotor{50.8e-3, 12.7e-3, 12.7e-3, 1.35};

const MechanicalParams table_one{8.99e-6, 3.17e-6, 8.54e-5, 0.484};

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

} // namespace

TEST_CASE("stator field at 3.4 cm matches a 40-digit evaluation") {
    // mpmath, 40 digits.
    CHECK(close_rel(stator_field(0.034, stator), 0.06465091979542971616, 1e-14));
}

TEST_CASE("stator field approaches the surface limit as d -> 0+") {
    const double L = stator.length, W = stator.width, T = stator.thickness;
    const double limit =
        2.0 * stator.residual_flux / pi *
        (pi / 2.0 - std::atan(L * W / (2.0 * T * std::sqrt(4.0 * T * T + L * L + W * W))));
    CHECK(close_rel(limit, 0.97343864624667922787, 1e-14));
    CHECK(close_rel(stator_field(0.5 * T + 1e-12, stator), limit, 1e-8));
}

TEST_CASE("stator field vanishes far away and is strictly decreasing") {
    CHECK(stator_field(100.0, stator) < 1e-6);
    double previous = stator_field(0.0064, stator);
    for (int i = 1; i <= 400; ++i) {
        const double d = 0.0064 + 1e-4 * i;
        const double b = stator_field(d, stator);
        CHECK(b > 0.0);
        CHECK(b < previous);
        previous = b;
    }
}

TEST_CASE("stator field rejects d_stator inside the magnet") {
    CHECK_THROWS_AS(stator_field(0.5 * stator.thickness, stator), Error);
    CHECK_THROWS_AS(stator_field(0.001, stator), Error);
}

TEST_CASE("dipole moment") {
    CHECK(dipole_moment(0.0, 1e-6) == 0.0);
    CHECK(close_rel(dipole_moment(rotor), 8.802277554475958, 1e-13));
    CHECK(close_rel(dipole_moment(1.35, 2.0 * rotor.volume()), 2.0 * dipole_moment(rotor), 1e-15));
    CHECK_THROWS_AS(dipole_moment(1.35, 0.0), Error);
    CHECK_THROWS_AS(dipole_moment(-1.0, 1e-6), Error);
}

TEST_CASE("spring prefactor alpha") {
    // With the rounded rotor volume quoted alongside the printed value.
    const double alpha_printed_volume = 2.0 * 1.35 * dipole_moment(1.35, 8.19e-6) / pi;
    CHECK(std::abs(alpha_printed_volume - 7.57) < 0.01);
    CHECK(close_rel(spring_prefactor(rotor), 7.565000309613119, 1e-13));
    CHECK(close_rel(spring_amplitude(0.034, stator, 7.57), 0.5694514407059212, 1e-13));
    CHECK(spring_amplitude(100.0, stator, 7.57) < 1e-6);
    CHECK_THROWS_AS(spring_amplitude(0.034, stator, 0.0), Error);
}

TEST_CASE("fitted alpha stays within about 6 percent of theory") {
    CHECK(std::abs(7.16 / 7.57 - 1.0) < 0.06);
    CHECK(close_rel(spring_amplitude(0.034, stator, 7.16) / spring_amplitude(0.034, stator, 7.57),
                    7.16 / 7.57, 1e-14));
}

TEST_CASE("restoring torque") {
    CHECK(restoring_torque(0.0, 0.484) == 0.0);
    CHECK(restoring_torque(pi / 2.0, 0.484) == doctest::Approx(-0.484).epsilon(1e-15));
    CHECK(restoring_torque(0.1, 0.484) == doctest::Approx(-0.04831932).epsilon(1e-7));
    CHECK(std::abs(restoring_torque(0.245, 1.0) / -0.245 - 1.0) < 0.01);
}

TEST_CASE("restoring torque is odd, bounded and linearizes to T_amp") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-10.0, 10.0), amp(1e-3, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double th = angle(rng), a = amp(rng);
        CHECK(restoring_torque(-th, a) == -restoring_torque(th, a));
        CHECK(std::abs(restoring_torque(th, a)) <= a);
        const double h = 1e-6;
        const double slope = -(restoring_torque(h, a) - restoring_torque(-h, a)) / (2.0 * h);
        CHECK(std::abs(slope - a) <= 1e-6 * a);
    }
}

TEST_CASE("coil torque and back-EMF couplings") {
    CHECK(std::abs(coil_torque(pi / 2.0, 3.0, 9.41e-3)) < 1e-17);
    CHECK(coil_torque(0.0, 1.0, 9.41e-3) == 9.41e-3);
    CHECK(coil_torque(0.3, -2.0, 9.41e-3) == -coil_torque(0.3, 2.0, 9.41e-3));
    CHECK(coil_torque(-0.3, 2.0, 9.41e-3) == coil_torque(0.3, 2.0, 9.41e-3));
    CHECK(back_emf(0.7, 0.0, 9.41e-3) == 0.0);
    CHECK(back_emf(0.0, 10.0, 9.41e-3) == doctest::Approx(94.1e-3).epsilon(1e-14));
}

TEST_CASE("mechanical and electrical power agree when k_T = k_EMF") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double th = u(rng), om = 10.0 * u(rng), cur = u(rng), k = std::abs(u(rng)) * 1e-2;
        CHECK(coil_torque(th, cur, k) * om == doctest::Approx(back_emf(th, om, k) * cur).epsilon(1e-15));
    }
}

TEST_CASE("beta model") {
    const double beta = beta_model(1.83e-3, 18e-3, 8.80e-3);
    CHECK(std::abs(beta / 2.90e-7 - 1.0) < 0.02);
    CHECK(close_rel(beta, 8.80e-3 * 18e-3 * 1.83e-3, 1e-14));
    CHECK(std::abs(3.32e-7 / beta - 1.0) < 0.15);
    CHECK(close_rel(beta_model(1.83e-3, 18e-3, 2.0 * 8.80e-3), 2.0 * beta, 1e-15));
    CHECK(close_rel(emf_coefficient(beta, 0.032), beta / (0.032 * 0.032 * 0.032), 1e-15));
    CHECK_THROWS_AS(beta_model(0.0, 18e-3, 8.8e-3), Error);
}

TEST_CASE("power-law fit recovers exact data") {
    std::vector<std::pair<double, double>> pts;
    for (double d : {0.01, 0.02, 0.05, 0.1, 0.3}) pts.emplace_back(d, 3.0 * std::pow(d, -2.0));
    const PowerLawFit fit = fit_power_law(pts);
    CHECK(close_rel(fit.prefactor, 3.0, 1e-10));
    CHECK(close_rel(fit.exponent, -2.0, 1e-10));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(close_rel(fit(0.07), 3.0 / 0.0049, 1e-10));
}

TEST_CASE("power-law fit round-trips a steep friction exponent") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 8; ++i) {
        const double d = 0.028 + 0.0015 * i;
        pts.emplace_back(d, 2.5e-14 * std::pow(d, -6.9));
    }
    const PowerLawFit fit = fit_power_law(pts);
    CHECK(close_rel(fit.exponent, -6.9, 1e-10));
    CHECK(close_rel(fit.prefactor, 2.5e-14, 1e-8));
}

TEST_CASE("power-law fit property: random exact laws are recovered") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> logA(-5.0, 5.0), expo(-8.0, 4.0), d(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double A = std::exp(logA(rng)), n = expo(rng);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 6; ++i) {
            const double x = d(rng);
            pts.emplace_back(x, A * std::pow(x, n));
        }
        const PowerLawFit fit = fit_power_law(pts);
        CHECK(std::abs(fit.exponent - n) <= 1e-10 * std::max(1.0, std::abs(n)));
        CHECK(close_rel(fit.prefactor, A, 1e-9));
        CHECK(fit.r_squared >= 0.0);
        CHECK(fit.r_squared <= 1.0);
    }
}

TEST_CASE("spring stiffness scales close to inverse square of the stator gap") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= 12; ++i) {
        const double d = 0.028 + 0.002 * i;
        pts.emplace_back(d, spring_amplitude(d, stator, 7.57));
    }
    const PowerLawFit fit = fit_power_law(pts);
    CHECK(fit.exponent == doctest::Approx(-2.1698).epsilon(1e-4));
    CHECK(std::abs(fit.exponent + 2.0) <= 0.3);
}

TEST_CASE("power-law fit input checks") {
    std::vector<std::pair<double, double>> one{{1.0, 1.0}};
    CHECK_THROWS_AS(fit_power_law(one), Error);
    std::vector<std::pair<double, double>> dup{{1.0, 1.0}, {1.0, 2.0}};
    CHECK_THROWS_AS(fit_power_law(dup), Error);
    std::vector<std::pair<double, double>> neg{{1.0, 1.0}, {2.0, -2.0}};
    CHECK_THROWS_AS(fit_power_law(neg), Error);
    try {
        fit_power_law(one);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::underdetermined);
    }
}

TEST_CASE("normalized parameters from the identified rotor") {
    const NormalizedDamping n = normalize(table_one);
    CHECK(close_rel(n.omega_n / (2.0 * pi), 36.92861047335912, 1e-13));
    CHECK(close_rel(n.zeta, 7.598480265374331e-4, 1e-13));
    CHECK(close_rel(n.theta_f, 1.764462809917355e-4, 1e-13));

    const NormalizedDamping zero = normalize({1.0, 0.0, 0.0, 2.0});
    CHECK(zero.zeta == 0.0);
    CHECK(zero.theta_f == 0.0);
}

TEST_CASE("normalize and denormalize are inverse") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> lg(-3.0, 3.0), z(0.0, 0.9);
    for (int i = 0; i < 500; ++i) {
        const double J = std::pow(10.0, lg(rng) - 4.0);
        const double K = std::pow(10.0, lg(rng));
        const double zeta = z(rng);
        const MechanicalParams p{J, 2.0 * zeta * std::sqrt(J * K), K * 1e-3 * z(rng), K};
        const MechanicalParams q = denormalize(normalize(p), J);
        CHECK(close_rel(q.inertia, p.inertia, 1e-15));
        CHECK(close_rel(q.viscous, p.viscous, 1e-14));
        CHECK(close_rel(q.dry_friction, p.dry_friction, 1e-14));
        CHECK(close_rel(q.spring_amp, p.spring_amp, 1e-14));
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((MechanicalParams{0.0, 0.0, 0.0, 1.0}.validate()), Error);
    CHECK_THROWS_AS((MechanicalParams{1.0, -1.0, 0.0, 1.0}.validate()), Error);
    CHECK_THROWS_AS((RingdownModal{1.0, 1.0, 0.0, 1.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((RingdownModal{1.0, 0.1, 0.0, 1.0, -pi}.validate()), Error);
    CHECK_NOTHROW((RingdownModal{1.0, 0.1, 0.0, 1.0, pi}.validate()));
    CHECK_THROWS_AS((CoilParams{0.0, 1e-3, 0.0, 0.0, 0.0, 0.03}.validate()), Error);
    CHECK_THROWS_AS((MagnetGeometry{1.0, 1.0, 0.0, 1.0}.validate()), Error);
}

TEST_CASE("error codes map to exit statuses") {
    CHECK(exit_status(ErrorCode::config) == 2);
    CHECK(exit_status(ErrorCode::domain) == 2);
    CHECK(exit_status(ErrorCode::parse) == 3);
    CHECK(exit_status(ErrorCode::step_underflow) == 4);
    CHECK(exit_status(ErrorCode::no_convergence) == 4);
    CHECK(to_string(ErrorCode::band_not_found) == "band_not_found");
}
