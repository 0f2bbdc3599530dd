#include "magspring/config.hpp"
#include "magspring/error.hpp"
#include "magspring/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

using namespace magspring;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::io;
}

std::string message_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("magspring_io_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("two-row time series") {
    const auto t = parse_csv("t,value\n0,1.5\n0.01,-2\n");
    const TimeSeries s = timeseries_from_table(t);
    CHECK(s.size() == 2);
    CHECK(s.t0 == 0.0);
    CHECK(s.dt == 0.01);
    CHECK(s.values[1] == -2.0);
}

TEST_CASE("comments, blank lines, byte-order mark and extra columns") {
    const std::string text = "\xEF\xBB\xBF# header note\n\nt,value,extra\n# mid\n1,2,3\n1.5,4,5\r\n2,6,7\n";
    const auto t = parse_csv(text);
    CHECK(t.comments.size() == 2);
    CHECK(t.comments[0] == "header note");
    CHECK(t.rows.size() == 3);
    const TimeSeries s = timeseries_from_table(t, Unit::rad, 0.5);
    CHECK(s.t0 == 1.0);
    CHECK(s.dt == 0.5);
    CHECK(s.values[2] == 3.0);
}

TEST_CASE("jittered timestamps are rejected") {
    CHECK(code_of([] { timeseries_from_table(parse_csv("t,value\n0,0\n1,0\n2.00001,0\n3.00001,0\n")); }) ==
          ErrorCode::non_uniform);
    CHECK(code_of([] { timeseries_from_table(parse_csv("t,value\n0,0\n1,0\n1,0\n")); }) == ErrorCode::non_uniform);
    // 1e-7 relative jitter is tolerated.
    const auto s = timeseries_from_table(parse_csv("t,value\n0,0\n1,0\n2.0000001,0\n3,0\n"));
    CHECK(s.dt == 1.0);
}

TEST_CASE("time-series header and length checks") {
    CHECK(code_of([] { timeseries_from_table(parse_csv("time,value\n0,0\n1,0\n")); }) == ErrorCode::parse);
    CHECK(code_of([] { timeseries_from_table(parse_csv("t,value\n0,0\n")); }) == ErrorCode::too_short);
    CHECK(code_of([] { parse_csv("# only a comment\n"); }) == ErrorCode::parse);
}

TEST_CASE("parse errors name the line and column") {
    const std::string msg = message_of([] { parse_csv("t,value\n0,1\n1,abc\n", "data.csv"); });
    CHECK(msg.find("data.csv:3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
    CHECK(code_of([] { parse_csv("t,value\n0,1,2\n"); }) == ErrorCode::parse);
    CHECK(code_of([] { parse_csv("t,value\n0,nan\n"); }) == ErrorCode::parse);
    CHECK(code_of([] { parse_csv("t,value\n0,1.5x\n"); }) == ErrorCode::parse);
    CHECK(code_of([] { parse_csv("t,value\n0,\n"); }) == ErrorCode::parse);
}

TEST_CASE("write then read preserves values bit-exactly") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    CsvTable t;
    t.columns = {"t", "value"};
    for (int i = 0; i < 2000; ++i) t.rows.push_back({0.001 * i, std::ldexp(mant(rng), expo(rng))});
    t.rows.push_back({2.0, std::numeric_limits<double>::denorm_min()});
    t.rows.push_back({2.001, -std::numeric_limits<double>::max()});
    const auto back = parse_csv(format_csv(t));
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(std::memcmp(&back.rows[i][j], &t.rows[i][j], sizeof(double)) == 0);
    CHECK(format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("drive schedules from CSV") {
    const auto fwd = drive_from_table(parse_csv("f_hz,u_amp_v\n30,0.3\n30.1,0.3\n30.2,0.5\n"));
    CHECK(fwd.direction == SweepDirection::forward);
    CHECK(fwd.points.size() == 3);
    CHECK(fwd.points[2].u_amp == 0.5);
    const auto bwd = drive_from_table(parse_csv("u_amp_v,f_hz\n1.7,44\n1.7,43.9\n"));
    CHECK(bwd.direction == SweepDirection::backward);
    CHECK(bwd.points[0].f_hz == 44.0);
    CHECK(code_of([] { drive_from_table(parse_csv("f_hz,u_amp_v\n30,1\n31,1\n30.5,1\n")); }) == ErrorCode::domain);
    CHECK(code_of([] { drive_from_table(parse_csv("f,u_amp_v\n30,1\n")); }) == ErrorCode::parse);
}

TEST_CASE("file round trip and atomic output sets") {
    const fs::path dir = scratch_dir("files");
    write_file_atomic(dir / "a.csv", "t,value\n0,1\n0.5,2\n");
    const TimeSeries s = load_timeseries_csv(dir / "a.csv");
    CHECK(s.dt == 0.5);
    CHECK(!fs::exists(dir / "a.csv.partial"));

    OutputSet set;
    set.add(dir / "b.txt", "b");
    set.add(dir / "missing" / "c.txt", "c");
    CHECK(code_of([&] { set.commit(); }) == ErrorCode::io);
    CHECK(!fs::exists(dir / "b.txt"));
    CHECK(!fs::exists(dir / "b.txt.partial"));
    CHECK(code_of([&] { load_timeseries_csv(dir / "nope.csv"); }) == ErrorCode::io);
    fs::remove_all(dir);
}

TEST_CASE("default configuration is the identified rotor") {
    const RunConfig c = parse_config("");
    CHECK(c.mechanical.inertia == 8.99e-6);
    CHECK(c.coil.inductance == 1.83e-3);
    CHECK(c.units.angle == AngleUnit::deg);
    CHECK(std::abs(c.spring_alpha() - 7.57) < 0.01);
    CHECK(c.drive.u_amps.size() == 4);
}

TEST_CASE("configuration keys carry their units") {
    const RunConfig c = parse_config("[mechanical]\nJ_kg_m2 = 1e-5\n"
                                     "[coil]\nd_coil_cm = 3.4\nloop_radius_mm = 20\n"
                                     "[stator]\nd_stator_m = 0.031\nalpha_N_m = 7.16\n"
                                     "[drive]\nu_amp_v = 0.5, 1.5\ndirections = forward\nn_transient = 50\n"
                                     "[sweep_integrator]\nfriction = event_exact\n"
                                     "[fit]\nseed = 18446744073709551615\nn_starts = 8\n"
                                     "[units]\nangle = rad\nlength = m\n");
    CHECK(c.mechanical.inertia == 1e-5);
    CHECK(std::abs(c.coil.distance - 0.034) < 1e-15);
    CHECK(std::abs(c.loop_radius - 0.020) < 1e-15);
    CHECK(c.d_stator == 0.031);
    CHECK(c.spring_alpha() == 7.16);
    CHECK(c.drive.u_amps == std::vector<double>{0.5, 1.5});
    CHECK(c.drive.forward);
    CHECK(!c.drive.backward);
    CHECK(*c.sweep.n_transient == 50);
    CHECK(c.sweep.integrator.friction == FrictionModel::event_exact);
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(c.n_starts == 8);
    CHECK(c.units.angle_scale() == 1.0);
    CHECK(c.units.length_suffix() == "m");
}

TEST_CASE("configuration errors") {
    CHECK(code_of([] { parse_config("[mechanical]\nJ = 1\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("[mechanics]\nJ_kg_m2 = 1\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("[coil]\nd_coil_m = 0.03\nd_coil_cm = 3\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("[mechanical]\nJ_kg_m2 = fast\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("[mechanical]\nJ_kg_m2 = -1\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("J_kg_m2 = 1\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("[mechanical\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("[drive]\ndirections = sideways\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("[drive]\nn_fft = 7\n"); }) == ErrorCode::config);
    CHECK(code_of([] { load_config("/nonexistent/run.ini"); }) == ErrorCode::config);
}
