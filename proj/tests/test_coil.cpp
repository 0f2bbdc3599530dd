#include "magspring/coil.hpp"
#include "magspring/error.hpp"
#include "magspring/model.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

using namespace magspring;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double deg = pi / 180.0;

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::io;
}

} // namespace

TEST_CASE("calibration round trip") {
    std::vector<CalibrationPair> pairs;
    for (int k = -6; k <= 6; ++k) pairs.push_back({k * 5.0 * deg, 1.12 * std::sin(k * 5.0 * deg) + 0.3});
    const auto c = fit_calibration(pairs);
    CHECK(c.A == doctest::Approx(1.12).epsilon(1e-13));
    CHECK(c.B == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(c.r_squared == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("calibration needs three pairs over more than ten degrees") {
    const std::vector<CalibrationPair> two{{0.0, 0.3}, {0.5, 0.8}};
    CHECK(code_of([&] { fit_calibration(two); }) == ErrorCode::underdetermined);
    const std::vector<CalibrationPair> narrow{{0.0, 0.3}, {4 * deg, 0.35}, {9 * deg, 0.4}};
    CHECK(code_of([&] { fit_calibration(narrow); }) == ErrorCode::degenerate);
}

TEST_CASE("delta angle inversion") {
    CHECK(delta_angle(0.0, 1.12) == 0.0);
    CHECK(delta_angle(1.12, 1.12) == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(delta_angle(-1.12, 1.12) == doctest::Approx(-pi / 2).epsilon(1e-15));
    CHECK(delta_angle(1.12 * std::sin(0.1), 1.12) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(code_of([] { delta_angle(1.13, 1.12); }) == ErrorCode::out_of_range);
    CHECK(code_of([] { delta_angle(0.1, 0.0); }) == ErrorCode::domain);
}

TEST_CASE("coupling slopes recover the rotor constant") {
    const double k = 9.41e-3;
    std::vector<TorqueSample> ts;
    std::vector<EmfSample> es;
    for (int j = 0; j < 9; ++j) {
        const double th = (j - 4) * 10.0 * deg, i = 0.05 + 0.02 * j, om = 3.0 + j;
        ts.push_back({k * i * std::cos(th), i, th});
        es.push_back({k * om * std::cos(th), om, th});
    }
    const auto t = fit_torque_coupling(ts);
    const auto e = fit_emf_coupling(es);
    CHECK(t.slope == doctest::Approx(k).epsilon(1e-14));
    CHECK(e.slope == doctest::Approx(k).epsilon(1e-14));
    CHECK(t.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coupling slopes need a non-degenerate regressor") {
    const std::vector<TorqueSample> perpendicular{{0.0, 0.1, pi / 2}, {0.0, 0.2, pi / 2}, {0.0, 0.3, pi / 2}};
    CHECK(code_of([&] { fit_torque_coupling(perpendicular); }) == ErrorCode::degenerate);
    const std::vector<EmfSample> single{{0.1, 2.0, 0.0}, {0.1, 2.0, 0.0}, {0.0, 0.0, 0.0}};
    CHECK(code_of([&] { fit_emf_coupling(single); }) == ErrorCode::degenerate);
}

TEST_CASE("back-EMF slopes over distance give the inverse cube law") {
    const double beta = 2.9e-7;
    std::vector<std::pair<double, double>> slope_vs_d;
    for (double d : {0.03, 0.035, 0.04, 0.05, 0.06}) {
        std::vector<EmfSample> es;
        for (int j = 0; j < 5; ++j) {
            const double om = 2.0 + j, th = j * 7.0 * deg;
            es.push_back({beta / (d * d * d) * om * std::cos(th), om, th});
        }
        slope_vs_d.push_back({d, fit_emf_coupling(es).slope});
    }
    const auto p = fit_power_law(slope_vs_d);
    CHECK(std::abs(p.exponent + 3.0) < 0.01);
    CHECK(p.prefactor == doctest::Approx(beta).epsilon(1e-9));
}

TEST_CASE("impedance fit recovers R and L") {
    const double R = 1.76, L = 1.83e-3;
    std::vector<ImpedancePoint> pts;
    for (double f = 10.0; f <= 200.0; f += 10.0) pts.push_back({f, std::hypot(R, 2.0 * pi * f * L)});
    const auto z = fit_impedance(pts);
    CHECK(z.resistance == doctest::Approx(R).epsilon(1e-12));
    CHECK(z.inductance == doctest::Approx(L).epsilon(1e-10));

    const std::vector<ImpedancePoint> with_dc{{0.0, R}, {100.0, std::hypot(R, 2.0 * pi * 100.0 * L)}};
    CHECK(fit_impedance(with_dc).resistance == doctest::Approx(R).epsilon(1e-14));
}

TEST_CASE("impedance fit under one percent multiplicative noise") {
    const double R = 1.76, L = 1.83e-3;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 0.01);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ImpedancePoint> pts;
        for (double f = 10.0; f <= 200.0; f += 5.0) pts.push_back({f, std::hypot(R, 2.0 * pi * f * L) * (1.0 + g(rng))});
        const auto z = fit_impedance(pts);
        CHECK(std::abs(z.resistance / R - 1.0) < 0.02);
        CHECK(std::abs(z.inductance / L - 1.0) < 0.02);
    }
}

TEST_CASE("impedance fit errors") {
    const std::vector<ImpedancePoint> one{{50.0, 2.0}, {50.0, 2.1}};
    CHECK(code_of([&] { fit_impedance(one); }) == ErrorCode::underdetermined);
    // |Z| growing faster than the RL law: negative R^2 intercept.
    const std::vector<ImpedancePoint> steep{{10.0, 0.1}, {100.0, 10.0}};
    CHECK(code_of([&] { fit_impedance(steep); }) == ErrorCode::non_physical);
}

TEST_CASE("coil field constant") {
    const double b = 4.07e-6;
    std::vector<FieldPoint> pts;
    for (double i : {0.05, 0.1, 0.2, 0.4}) pts.push_back({i, b * i});
    CHECK(fit_field_constant(pts).slope == doctest::Approx(b).epsilon(1e-14));
    const std::vector<FieldPoint> zero{{0.0, 0.0}, {0.0, 1e-7}};
    CHECK(code_of([&] { fit_field_constant(zero); }) == ErrorCode::degenerate);
}

TEST_CASE("field constant is the same for pooled frequencies") {
    const double b = 4.07e-6;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1e-3);
    std::vector<FieldPoint> f60, f100, pooled;
    for (int k = 1; k <= 8; ++k) {
        const double i = 0.05 * k;
        f60.push_back({i, b * i * (1.0 + g(rng))});
        f100.push_back({i * 1.3, b * i * 1.3 * (1.0 + g(rng))});
    }
    pooled = f60;
    pooled.insert(pooled.end(), f100.begin(), f100.end());
    const double s60 = fit_field_constant(f60).slope, s100 = fit_field_constant(f100).slope;
    const double sp = fit_field_constant(pooled).slope;
    CHECK(std::abs(s60 / b - 1.0) < 2e-3);
    CHECK(std::abs(s100 / b - 1.0) < 2e-3);
    CHECK(std::abs(sp / b - 1.0) < 2e-3);
    CHECK(std::abs(s60 / s100 - 1.0) < 3e-3);
}

TEST_CASE("rotor field extraction basics") {
    const PhasorSample net{60.0, 3e-6, 0.4}, cur{60.0, 0.5, 0.0};
    CHECK(extract_rotor_field(net, cur, 0.0) == doctest::Approx(3e-6).epsilon(1e-15));
    const PhasorSample coil_only{60.0, 4.07e-6 * 0.5, 0.0};
    CHECK(std::abs(extract_rotor_field(coil_only, cur, 4.07e-6)) < 1e-20);
    CHECK(code_of([&] { extract_rotor_field(net, PhasorSample{100.0, 0.5, 0.0}, 4.07e-6); }) ==
          ErrorCode::frequency_mismatch);
    CHECK(code_of([&] { extract_rotor_field(PhasorSample{60.0, -1.0, 0.0}, cur, 1.0); }) == ErrorCode::domain);
    CHECK(code_of([&] { extract_rotor_field(PhasorSample{60.0, 1.0, -pi}, cur, 1.0); }) == ErrorCode::domain);
}

TEST_CASE("rotor field extraction inverts the superposition") {
    const double b = 4.07e-6;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> amp(1e-7, 1e-5), ph(-pi, pi), cur(0.01, 1.0), ref(-pi, pi);
    for (int trial = 0; trial < 200; ++trial) {
        const double rotor_mag = amp(rng), rotor_ph = ph(rng), i_amp = cur(rng), i_ph = ref(rng);
        // Net field = coil field (in phase with the current) + rotor field.
        const std::complex<double> net = b * i_amp * std::polar(1.0, i_ph) + std::polar(rotor_mag, rotor_ph);
        const double net_phase = std::arg(net) == -pi ? pi : std::arg(net);
        const double got = extract_rotor_field({80.0, std::abs(net), net_phase}, {80.0, i_amp, i_ph}, b);
        CHECK(std::abs(got / rotor_mag - 1.0) < 1e-12);
    }
}
