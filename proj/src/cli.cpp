#include "magspring/cli.hpp"

#include "magspring/coil.hpp"
#include "magspring/config.hpp"
#include "magspring/energetics.hpp"
#include "magspring/error.hpp"
#include "magspring/fit.hpp"
#include "magspring/io.hpp"
#include "magspring/ringdown.hpp"
#include "magspring/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace magspring {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double pi = std::numbers::pi;

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> angle_unit;
    std::optional<std::string> length_unit;
};

struct PreprocessFlags {
    bool no_filter = false;
    bool no_trim = false;
    std::optional<double> cutoff_hz;
    double upper = 15.0; // boundary angle unit
    double lower = 2.5;

    PreprocessOptions options(const UnitPreferences& u) const {
        PreprocessOptions p;
        p.filter = !no_filter;
        p.cutoff_hz = cutoff_hz;
        p.trim = !no_trim;
        p.upper = upper * u.angle_scale();
        p.lower = lower * u.angle_scale();
        return p;
    }
};

void add_preprocess_flags(CLI::App* cmd, PreprocessFlags& f) {
    cmd->add_flag("--no-filter", f.no_filter, "Skip the zero-phase low-pass filter");
    cmd->add_option("--cutoff-hz", f.cutoff_hz, "Low-pass cutoff (default 100 x oscillation frequency)");
    cmd->add_flag("--no-trim", f.no_trim, "Keep the whole record instead of the amplitude band");
    cmd->add_option("--upper", f.upper, "Upper edge of the fitted amplitude band (angle unit)")->capture_default_str();
    cmd->add_option("--lower", f.lower, "Lower edge of the fitted amplitude band (angle unit)")->capture_default_str();
}

RunConfig resolve_config(const GlobalOptions& g) {
    RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    if (g.angle_unit) cfg.units.angle = *g.angle_unit == "rad" ? AngleUnit::rad : AngleUnit::deg;
    if (g.length_unit) cfg.units.length = *g.length_unit == "m" ? LengthUnit::m : LengthUnit::cm;
    return cfg;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec && fs::is_directory(dir), ErrorCode::io, "cannot create output directory " + dir.string());
}

void add_noise(std::vector<double>& v, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0 || v.empty()) return;
    double rms = 0.0;
    for (double x : v) rms += x * x;
    rms = std::sqrt(rms / static_cast<double>(v.size()));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, fraction * rms);
    for (double& x : v) x += g(rng);
}

std::string short_number(double x) {
    std::ostringstream s;
    s << std::setprecision(6) << x;
    return s.str();
}

// ---------------------------------------------------------------- simulate-ringdown

struct SimulateArgs {
    double theta0 = 15.0;
    double omega0 = 0.0;
    double t_end = 10.0;
    double dt = 1e-3;
    std::string method = "analytic";
    std::string spring = "linear";
    double noise = 0.0;
    std::string output;
};

int simulate_ringdown(const RunConfig& cfg, const SimulateArgs& a, std::ostream& out) {
    const double as = cfg.units.angle_scale();
    require(a.dt > 0.0 && a.t_end > 0.0, ErrorCode::config, "--dt and --t-end must be positive");
    require(a.noise >= 0.0, ErrorCode::config, "--noise must be >= 0");
    const double theta0 = a.theta0 * as, omega0 = a.omega0 * as;
    const auto n = static_cast<std::size_t>(std::floor(a.t_end / a.dt + 1e-9)) + 1;
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * a.dt;

    std::vector<double> analytic, ode;
    if (a.method != "ode") analytic = combined_response(build_schedule(normalize(cfg.mechanical), theta0, omega0), t);
    if (a.method != "analytic") {
        const SpringModel spring = a.spring == "sinusoidal" ? SpringModel::sinusoidal : SpringModel::linear;
        const Trajectory traj = integrate_free(cfg.mechanical, theta0, omega0, t.back(), SampleGrid{a.dt},
                                               cfg.ringdown_integrator, spring);
        ode = traj.theta;
        ode.resize(n, ode.empty() ? theta0 : ode.back());
    }
    add_noise(analytic, a.noise, cfg.seed);
    add_noise(ode, a.noise, cfg.seed + 1);

    const std::string unit = cfg.units.angle_suffix();
    CsvTable table;
    table.comments.push_back("magspring simulate-ringdown");
    std::string cols = "columns: t [s], value [" + unit + "] rotor angle from the " +
                       (a.method == "ode" ? std::string("integrated equation of motion") : "closed-form solution");
    if (a.method == "both") cols += ", value_ode [" + unit + "] rotor angle from the integrated equation of motion";
    table.comments.push_back(cols);
    table.comments.push_back("J_kg_m2=" + format_number(cfg.mechanical.inertia) +
                             " c_N_m_s_per_rad=" + format_number(cfg.mechanical.viscous) +
                             " T_f_N_m=" + format_number(cfg.mechanical.dry_friction) +
                             " T_amp_N_m=" + format_number(cfg.mechanical.spring_amp));
    table.comments.push_back("theta0_" + unit + "=" + format_number(a.theta0) + " omega0_" + unit +
                             "_per_s=" + format_number(a.omega0) + " noise_fraction=" + format_number(a.noise) +
                             " seed=" + std::to_string(cfg.seed));
    table.columns = {"t", "value"};
    if (a.method == "both") table.columns.push_back("value_ode");
    const std::vector<double>& first = a.method == "ode" ? ode : analytic;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row{t[i], first[i] / as};
        if (a.method == "both") row.push_back(ode[i] / as);
        table.rows.push_back(std::move(row));
    }
    write_file_atomic(a.output, format_csv(table));
    out << "wrote " << n << " samples to " << a.output << "\n";
    return 0;
}

// ---------------------------------------------------------------- fit-ringdown

json report_json(const FitReport& r, const RunConfig& cfg) {
    const double as = cfg.units.angle_scale();
    const std::string au = cfg.units.angle_suffix();
    const RingdownModal m = r.modal();
    const double J = cfg.mechanical.inertia, K = J * m.omega_n * m.omega_n;
    json j;
    j["model"] = r.model;
    j["omega_n_rad_per_s"] = m.omega_n;
    j["f_n_hz"] = m.omega_n / (2.0 * pi);
    j["zeta"] = m.zeta;
    if (r.model == "combined") j["theta_f_" + au] = m.theta_f / as;
    j["theta0_amp_" + au] = m.Theta0 / as;
    j["phi0_" + au] = m.phi0 / as;
    j["k_mag_n_m_per_rad"] = K;
    j["c_n_m_s_per_rad"] = 2.0 * m.zeta * std::sqrt(J * K);
    if (r.model == "combined") j["t_f_n_m"] = m.theta_f * K;
    j["sse_rad2"] = r.sse;
    j["r_squared"] = r.r_squared;
    j["n_starts_used"] = r.n_starts_used;
    j["converged"] = r.converged;
    j["notes"] = r.notes;
    return j;
}

struct EnergySummary {
    double K;
    double err_viscous;
    double err_combined;
    EnergyTrace experimental;
    EnergyTrace viscous;
    EnergyTrace combined;
};

EnergySummary energy_summary(const TimeSeries& s, const RingdownModal& viscous, const RingdownModal& combined,
                             double J) {
    EnergySummary e;
    e.K = J * combined.omega_n * combined.omega_n;
    e.experimental = experimental_dissipation(s, e.K, J);
    const auto dv = damping_torques(viscous, J * viscous.omega_n * viscous.omega_n, J);
    const auto dc = damping_torques(combined, e.K, J);
    e.viscous = model_dissipation(s, dv.c, dv.T_f);
    e.combined = model_dissipation(s, dc.c, dc.T_f);
    e.err_viscous = relative_rms_error(e.experimental, e.viscous);
    e.err_combined = relative_rms_error(e.experimental, e.combined);
    return e;
}

struct FitArgs {
    std::string input;
    std::string output;
    std::optional<int> n_starts;
    PreprocessFlags pre;
};

int fit_ringdown_cmd(const RunConfig& cfg, const FitArgs& a, std::ostream& out) {
    const TimeSeries raw = load_timeseries_csv(a.input, Unit::rad, cfg.units.angle_scale());
    const FitOptions fo{a.n_starts.value_or(cfg.n_starts), cfg.seed};
    require(fo.n_starts >= 1, ErrorCode::config, "--n-starts must be >= 1");
    const RingdownFits fits = fit_ringdown(raw, a.pre.options(cfg.units), fo);
    const EnergySummary e =
        energy_summary(fits.series, fits.viscous.modal(), fits.combined.modal(), cfg.mechanical.inertia);

    json j;
    j["command"] = "fit-ringdown";
    j["input"] = a.input;
    j["seed"] = cfg.seed;
    j["n_starts"] = fo.n_starts;
    j["samples_raw"] = raw.size();
    j["samples_fitted"] = fits.series.size();
    j["fit_start_time_s"] = fits.series.t0;
    j["models"]["viscous"] = report_json(fits.viscous, cfg);
    j["models"]["combined"] = report_json(fits.combined, cfg);
    j["energy"]["inertia_kg_m2"] = cfg.mechanical.inertia;
    j["energy"]["stiffness_n_m_per_rad"] = e.K;
    j["energy"]["relative_rms_error_viscous"] = e.err_viscous;
    j["energy"]["relative_rms_error_combined"] = e.err_combined;
    if (a.output.empty()) {
        out << dump(j);
    } else {
        write_file_atomic(a.output, dump(j));
        out << "wrote fit report to " << a.output << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::string output_dir;
    std::optional<std::vector<double>> u_amps;
    std::optional<double> f_lo, f_hi, step;
    std::optional<std::string> directions;
    std::optional<std::string> drive_csv;
    std::optional<int> n_transient;
    std::optional<int> n_fft;
    std::optional<std::string> spring;
    std::optional<double> tol_hz;
    double jump_fraction = 0.25;
};

DriveSchedule reversed(DriveSchedule s) {
    std::reverse(s.points.begin(), s.points.end());
    s.direction = s.direction == SweepDirection::forward ? SweepDirection::backward : SweepDirection::forward;
    return s;
}

int sweep_cmd(RunConfig cfg, const SweepArgs& a, std::ostream& out) {
    DrivePlan& plan = cfg.drive;
    if (a.u_amps) plan.u_amps = *a.u_amps;
    if (a.f_lo) plan.f_lo = *a.f_lo;
    if (a.f_hi) plan.f_hi = *a.f_hi;
    if (a.step) plan.step = *a.step;
    if (a.directions) {
        plan.forward = *a.directions != "backward";
        plan.backward = *a.directions != "forward";
    }
    if (a.drive_csv) plan.schedule_csv = *a.drive_csv;
    if (a.n_transient) cfg.sweep.n_transient = *a.n_transient;
    if (a.n_fft) cfg.sweep.n_fft = *a.n_fft;
    if (a.spring) cfg.sweep.spring = *a.spring == "linear" ? SpringModel::linear : SpringModel::sinusoidal;
    require(a.jump_fraction > 0.0 && a.jump_fraction < 1.0, ErrorCode::config, "--jump-fraction must be in (0, 1)");
    try {
        cfg.validate();
    } catch (const Error& e) {
        fail(ErrorCode::config, std::string("invalid configuration: ") + e.what());
    }

    // One (label, forward schedule) pair per drive level.
    std::vector<std::pair<std::string, DriveSchedule>> levels;
    double tol_hz = plan.step;
    if (plan.schedule_csv) {
        DriveSchedule s = load_drive_csv(*plan.schedule_csv);
        if (s.direction == SweepDirection::backward) s = reversed(std::move(s));
        tol_hz = s.points.size() >= 2 ? s.points[1].f_hz - s.points[0].f_hz : 0.0;
        for (std::size_t k = 1; k < s.points.size(); ++k)
            tol_hz = std::min(tol_hz, s.points[k].f_hz - s.points[k - 1].f_hz);
        levels.emplace_back("schedule", std::move(s));
    } else {
        for (double u : plan.u_amps)
            levels.emplace_back("u" + short_number(u) + "V",
                                DriveSchedule::uniform(plan.f_lo, plan.f_hi, plan.step, u, SweepDirection::forward));
    }
    if (a.tol_hz) tol_hz = *a.tol_hz;

    const fs::path dir = a.output_dir;
    ensure_directory(dir);
    const double as = cfg.units.angle_scale();
    const std::string au = cfg.units.angle_suffix();
    OutputSet outputs;
    std::vector<SweepResult> all;
    json drives = json::array();
    std::size_t rows = 0;
    for (const auto& [label, fwd] : levels) {
        std::optional<SweepResult> forward, backward;
        if (plan.forward) forward = run_sweep(cfg.mechanical, cfg.coil, fwd, cfg.sweep, label);
        if (plan.backward) backward = run_sweep(cfg.mechanical, cfg.coil, reversed(fwd), cfg.sweep, label);
        json d;
        d["label"] = label;
        if (!plan.schedule_csv) d["u_amp_v"] = fwd.points.front().u_amp;
        json files = json::array();
        long unconverged = 0;
        for (const auto* r : {forward ? &*forward : nullptr, backward ? &*backward : nullptr}) {
            if (!r) continue;
            CsvTable t;
            t.comments.push_back("magspring sweep, " + std::string(to_string(r->direction)) + ", drive " + label);
            t.comments.push_back("columns: f_hz [Hz] drive frequency, theta_amp_" + au + " [" + au +
                                 "] steady rotor amplitude, i_amp_a [A] coil current amplitude, phase_" + au +
                                 " [" + au + "] rotor phase relative to the drive, converged [0|1], u_amp_v [V]");
            t.columns = {"f_hz", "theta_amp_" + au, "i_amp_a", "phase_" + au, "converged", "u_amp_v"};
            for (const auto& p : r->points) {
                t.rows.push_back({p.f_hz, p.theta_amp / as, p.i_amp, p.theta_phase / as, p.converged ? 1.0 : 0.0,
                                  p.u_amp});
                if (!p.converged) ++unconverged;
            }
            rows += r->points.size();
            const std::string name = "sweep_" + std::string(to_string(r->direction)) + "_" + label + ".csv";
            outputs.add(dir / name, format_csv(t));
            files.push_back(name);
            all.push_back(*r);
        }
        d["files"] = files;
        d["unconverged_points"] = unconverged;
        if (forward && backward) {
            const JumpReport jr = detect_jumps(*forward, *backward, a.jump_fraction);
            d["jumps"] = {{"forward_jump_f_hz", jr.fwd_jump_f},
                          {"backward_jump_f_hz", jr.bwd_jump_f},
                          {"forward_delta_amp_" + au, jr.fwd_delta_amp / as},
                          {"backward_delta_amp_" + au, jr.bwd_delta_amp / as},
                          {"hysteresis", jr.hysteresis}};
        }
        drives.push_back(d);
    }
    const auto backbone = extract_backbone(all);
    json bb = json::array();
    for (std::size_t k = 0; k < backbone.size(); ++k) {
        bb.push_back({{"label", backbone[k].drive_label},
                      {"f_peak_hz", backbone[k].f_peak},
                      {"theta_peak_" + au, backbone[k].theta_peak / as}});
        drives[k]["backbone"] = bb.back();
    }
    json report;
    report["command"] = "sweep";
    report["rows"] = rows;
    report["drives"] = drives;
    report["backbone"] = bb;
    report["classification_tol_hz"] = tol_hz;
    report["nonlinearity"] = std::string(to_string(classify_nonlinearity(backbone, tol_hz)));
    outputs.add(dir / "sweep_report.json", dump(report));
    outputs.commit();
    out << "wrote " << rows << " sweep rows and sweep_report.json to " << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- spring-model

struct SpringArgs {
    std::optional<double> d_min, d_max, d_step;
    std::optional<double> alpha;
    std::string output;
};

int spring_model_cmd(const RunConfig& cfg, const SpringArgs& a, std::ostream& out) {
    const double ls = cfg.units.length_scale();
    const std::string lu = cfg.units.length_suffix();
    const double d_min = a.d_min.value_or(2.8e-2 / ls) * ls;
    const double d_max = a.d_max.value_or(5.2e-2 / ls) * ls;
    const double step = a.d_step.value_or(0.1e-2 / ls) * ls;
    require(d_min > 0.0 && d_max >= d_min && step > 0.0, ErrorCode::config, "need 0 < d_min <= d_max and step > 0");
    const double alpha = a.alpha.value_or(cfg.spring_alpha());
    require(alpha > 0.0, ErrorCode::config, "--alpha must be positive");
    const auto n = static_cast<long>(std::floor((d_max - d_min) / step + 1e-9)) + 1;

    CsvTable t;
    t.columns = {"d_stator_" + lu, "b_s_t", "t_amp_n_m", "k_mag_n_m_per_rad"};
    std::vector<std::pair<double, double>> pts;
    for (long k = 0; k < n; ++k) {
        const double d = d_min + static_cast<double>(k) * step;
        const double T = spring_amplitude(d, cfg.stator, alpha);
        // The linearized stiffness of T_amp sin(theta) is T_amp.
        t.rows.push_back({d / ls, stator_field(d, cfg.stator), T, T});
        pts.emplace_back(d, T);
    }
    std::optional<PowerLawFit> fit;
    if (pts.size() >= 2) fit = fit_power_law(pts);
    t.comments.push_back("magspring spring-model, alpha_N_m=" + format_number(alpha));
    t.comments.push_back("columns: d_stator_" + lu + " [" + lu + "] stator gap, b_s_t [T] stator field at the rotor, "
                         "t_amp_n_m [N m] spring amplitude, k_mag_n_m_per_rad [N m/rad] linearized stiffness");
    if (fit)
        t.comments.push_back("power law k_mag = A d^n with d in m: n=" + format_number(fit->exponent) +
                             " A=" + format_number(fit->prefactor) + " r_squared=" + format_number(fit->r_squared));
    write_file_atomic(a.output, format_csv(t));
    json j{{"command", "spring-model"}, {"output", a.output}, {"rows", n}, {"alpha_n_m", alpha}};
    if (fit) {
        j["power_law_exponent"] = fit->exponent;
        j["power_law_prefactor_si"] = fit->prefactor;
        j["power_law_r_squared"] = fit->r_squared;
    }
    out << dump(j);
    return 0;
}

// ---------------------------------------------------------------- fit-coil

struct CoilArgs {
    std::string impedance, torque, emf, field;
    std::string output;
};

double angle_column_scale(const CsvTable& t, const std::string& source, std::size_t& index) {
    if ((index = t.find("theta_deg")) != std::string::npos) return pi / 180.0;
    if ((index = t.find("theta_rad")) != std::string::npos) return 1.0;
    fail(ErrorCode::parse, source + ": missing column 'theta_deg' or 'theta_rad'");
}

std::size_t column_of(const CsvTable& t, const std::string& name, const std::string& source) {
    const std::size_t i = t.find(name);
    require(i != std::string::npos, ErrorCode::parse, source + ": missing column '" + name + "'");
    return i;
}

int fit_coil_cmd(const RunConfig& cfg, const CoilArgs& a, std::ostream& out) {
    require(!a.impedance.empty() || !a.torque.empty() || !a.emf.empty() || !a.field.empty(), ErrorCode::config,
            "fit-coil needs at least one of --impedance, --torque, --emf, --field");
    json j;
    j["command"] = "fit-coil";
    double L = cfg.coil.inductance;
    if (!a.impedance.empty()) {
        const CsvTable t = read_csv(a.impedance);
        const auto fi = column_of(t, "f_hz", a.impedance), zi = column_of(t, "z_ohm", a.impedance);
        std::vector<ImpedancePoint> pts;
        for (const auto& r : t.rows) pts.push_back({r[fi], r[zi]});
        const ImpedanceFit f = fit_impedance(pts);
        j["resistance_ohm"] = f.resistance;
        j["inductance_h"] = f.inductance;
        j["impedance_r_squared"] = f.r_squared;
        L = f.inductance;
    }
    if (!a.field.empty()) {
        const CsvTable t = read_csv(a.field);
        const auto ii = column_of(t, "current_a", a.field), bi = column_of(t, "field_t", a.field);
        std::vector<FieldPoint> pts;
        for (const auto& r : t.rows) pts.push_back({r[ii], r[bi]});
        const SlopeFit f = fit_field_constant(pts);
        j["b_i_t_per_a"] = f.slope;
        j["b_i_r_squared"] = f.r_squared;
    }
    if (!a.torque.empty()) {
        const CsvTable t = read_csv(a.torque);
        std::size_t th = 0;
        const double s = angle_column_scale(t, a.torque, th);
        const auto ti = column_of(t, "torque_n_m", a.torque), ci = column_of(t, "current_a", a.torque);
        std::vector<TorqueSample> pts;
        for (const auto& r : t.rows) pts.push_back({r[ti], r[ci], r[th] * s});
        const SlopeFit f = fit_torque_coupling(pts);
        j["k_t_n_m_per_a"] = f.slope;
        j["k_t_r_squared"] = f.r_squared;
    }
    if (!a.emf.empty()) {
        const CsvTable t = read_csv(a.emf);
        std::size_t th = 0;
        const double s = angle_column_scale(t, a.emf, th);
        const auto ui = column_of(t, "u_emf_v", a.emf), wi = column_of(t, "omega_rad_per_s", a.emf);
        std::vector<EmfSample> pts;
        for (const auto& r : t.rows) pts.push_back({r[ui], r[wi], r[th] * s});
        const SlopeFit f = fit_emf_coupling(pts);
        const double d = cfg.coil.distance;
        j["k_emf_v_s_per_rad"] = f.slope;
        j["k_emf_r_squared"] = f.r_squared;
        j["beta_from_k_emf_v_s_m3_per_rad"] = f.slope * d * d * d;
    }
    j["beta_model_v_s_m3_per_rad"] = beta_model(L, cfg.loop_radius, cfg.rotor_moment());
    j["beta_inputs"] = {{"inductance_h", L},
                        {"loop_radius_m", cfg.loop_radius},
                        {"m_r_a_m2", cfg.rotor_moment()},
                        {"d_coil_m", cfg.coil.distance}};
    if (a.output.empty()) {
        out << dump(j);
    } else {
        write_file_atomic(a.output, dump(j));
        out << "wrote coil identification to " << a.output << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- energy-compare

struct EnergyArgs {
    std::string input;
    std::string fit;
    std::string output_dir;
    PreprocessFlags pre;
};

double angle_entry(const json& model, const std::string& base, const std::string& source) {
    if (model.contains(base + "_rad")) return model.at(base + "_rad").get<double>();
    if (model.contains(base + "_deg")) return model.at(base + "_deg").get<double>() * pi / 180.0;
    fail(ErrorCode::parse, source + ": missing " + base + "_rad or " + base + "_deg");
}

RingdownModal modal_from_report(const json& report, const std::string& name, const std::string& source) {
    require(report.contains("models") && report["models"].contains(name), ErrorCode::parse,
            source + ": no '" + name + "' model in the fit report");
    const json& m = report["models"][name];
    try {
        RingdownModal r{m.at("omega_n_rad_per_s").get<double>(), m.at("zeta").get<double>(), 0.0,
                        angle_entry(m, "theta0_amp", source), angle_entry(m, "phi0", source)};
        if (name == "combined") r.theta_f = angle_entry(m, "theta_f", source);
        return r;
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, source + ": " + e.what());
    }
}

CsvTable energy_table(const EnergyTrace& e, const std::string& what) {
    CsvTable t;
    t.comments.push_back("magspring energy-compare, " + what);
    if (e.e_mech.empty()) {
        t.comments.push_back("columns: t_s [s], e_dis_j [J] cumulative dissipated energy");
        t.columns = {"t_s", "e_dis_j"};
        for (std::size_t i = 0; i < e.times.size(); ++i) t.rows.push_back({e.times[i], e.e_dis[i]});
    } else {
        t.comments.push_back("columns: t_s [s], e_mech_j [J] mechanical energy, e_dis_j [J] cumulative decline");
        t.columns = {"t_s", "e_mech_j", "e_dis_j"};
        for (std::size_t i = 0; i < e.times.size(); ++i) t.rows.push_back({e.times[i], e.e_mech[i], e.e_dis[i]});
    }
    return t;
}

int energy_compare_cmd(const RunConfig& cfg, const EnergyArgs& a, std::ostream& out) {
    const TimeSeries raw = load_timeseries_csv(a.input, Unit::rad, cfg.units.angle_scale());
    const Preprocessed pre = preprocess_ringdown(raw, a.pre.options(cfg.units));
    const TimeSeries& s = pre.series;
    const double J = cfg.mechanical.inertia;
    json j;
    j["command"] = "energy-compare";
    j["input"] = a.input;
    j["samples"] = s.size();
    j["inertia_kg_m2"] = J;
    j["notes"] = pre.notes;
    const fs::path dir = a.output_dir;
    ensure_directory(dir);
    OutputSet outputs;
    if (a.fit.empty()) {
        const MechanicalParams& p = cfg.mechanical;
        const EnergyTrace exp = experimental_dissipation(s, p.spring_amp, J);
        const EnergyTrace mod = model_dissipation(s, p.viscous, p.dry_friction);
        j["source"] = "config";
        j["stiffness_n_m_per_rad"] = p.spring_amp;
        j["relative_rms_error"] = {{"config", relative_rms_error(exp, mod)}};
        outputs.add(dir / "energy_experimental.csv", format_csv(energy_table(exp, "measured dissipation")));
        outputs.add(dir / "energy_model_config.csv", format_csv(energy_table(mod, "configured damping torques")));
    } else {
        json report;
        try {
            report = json::parse(read_text_file(a.fit));
        } catch (const json::parse_error& e) {
            fail(ErrorCode::parse, a.fit + ": " + e.what());
        }
        const EnergySummary e = energy_summary(s, modal_from_report(report, "viscous", a.fit),
                                               modal_from_report(report, "combined", a.fit), J);
        j["source"] = a.fit;
        j["stiffness_n_m_per_rad"] = e.K;
        j["relative_rms_error"] = {{"viscous", e.err_viscous}, {"combined", e.err_combined}};
        outputs.add(dir / "energy_experimental.csv", format_csv(energy_table(e.experimental, "measured dissipation")));
        outputs.add(dir / "energy_model_viscous.csv", format_csv(energy_table(e.viscous, "viscous model")));
        outputs.add(dir / "energy_model_combined.csv", format_csv(energy_table(e.combined, "combined model")));
    }
    json files = json::array();
    for (const auto& f : outputs.files()) files.push_back(f.first.filename().string());
    j["files"] = files;
    outputs.add(dir / "energy_report.json", dump(j));
    outputs.commit();
    out << dump(j["relative_rms_error"]);
    return 0;
}

void report_error(std::ostream& err, const std::string& code, int status, const std::string& message) {
    json j;
    j["error"] = {{"code", code}, {"exit_status", status}, {"message", message}};
    err << j.dump() << "\n";
}

const char* ringdown_columns =
    "Output: CSV with '#' header comments, columns t [s], value [angle unit]\n"
    "and, with --method both, value_ode [angle unit].";
const char* fit_columns =
    "Input: CSV with header t,value (value in the angle unit).\n"
    "Output: JSON with models.viscous and models.combined (omega_n_rad_per_s, f_n_hz, zeta,\n"
    "theta_f_<angle>, theta0_amp_<angle>, phi0_<angle>, k_mag_n_m_per_rad, c_n_m_s_per_rad,\n"
    "t_f_n_m, sse_rad2, r_squared, n_starts_used, converged, notes) and energy\n"
    "(relative_rms_error_viscous, relative_rms_error_combined).";
const char* sweep_columns =
    "Output: sweep_<direction>_<label>.csv with columns f_hz, theta_amp_<angle>, i_amp_a,\n"
    "phase_<angle>, converged, u_amp_v; sweep_report.json with backbone, jumps and\n"
    "nonlinearity. --drive-csv takes columns f_hz,u_amp_v.";
const char* spring_columns =
    "Output: CSV with columns d_stator_<length>, b_s_t, t_amp_n_m, k_mag_n_m_per_rad;\n"
    "the power-law fit of k_mag against d_stator is printed as JSON.";
const char* coil_columns =
    "Inputs: impedance CSV f_hz,z_ohm; torque CSV torque_n_m,current_a,theta_deg|theta_rad;\n"
    "emf CSV u_emf_v,omega_rad_per_s,theta_deg|theta_rad; field CSV current_a,field_t.\n"
    "Output: JSON with resistance_ohm, inductance_h, b_i_t_per_a, k_t_n_m_per_a,\n"
    "k_emf_v_s_per_rad, beta_model_v_s_m3_per_rad, beta_from_k_emf_v_s_m3_per_rad.";
const char* energy_columns =
    "Output: energy_experimental.csv (t_s, e_mech_j, e_dis_j), energy_model_<name>.csv\n"
    "(t_s, e_dis_j) and energy_report.json with relative_rms_error per model.";

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and identification of a torsional magnetic-spring oscillator"};
    app.name("magspring");
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "INI run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Seed for multi-start sampling and noise injection");
    app.add_option("--angle-unit", g.angle_unit, "Angle unit at the boundary (default deg)")
        ->check(CLI::IsMember({"deg", "rad"}));
    app.add_option("--length-unit", g.length_unit, "Length unit at the boundary (default cm)")
        ->check(CLI::IsMember({"cm", "m"}));

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate-ringdown", "Free ringdown from an initial angle");
    c_sim->add_option("-o,--output", sim.output, "Output CSV")->required();
    c_sim->add_option("--theta0", sim.theta0, "Initial angle (angle unit)")->capture_default_str();
    c_sim->add_option("--omega0", sim.omega0, "Initial angular velocity (angle unit per s)")->capture_default_str();
    c_sim->add_option("--t-end", sim.t_end, "Record length, s")->capture_default_str();
    c_sim->add_option("--dt", sim.dt, "Sample spacing, s")->capture_default_str();
    c_sim->add_option("--method", sim.method, "Closed form, direct integration or both")
        ->check(CLI::IsMember({"analytic", "ode", "both"}))
        ->capture_default_str();
    c_sim->add_option("--spring", sim.spring, "Spring law for the integrated model")
        ->check(CLI::IsMember({"linear", "sinusoidal"}))
        ->capture_default_str();
    c_sim->add_option("--noise", sim.noise, "Gaussian noise RMS as a fraction of the signal RMS")
        ->capture_default_str();
    c_sim->footer(ringdown_columns);

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit-ringdown", "Fit viscous and combined damping models to a ringdown");
    c_fit->add_option("-i,--input", fit.input, "Time-series CSV")->required()->check(CLI::ExistingFile);
    c_fit->add_option("-o,--output", fit.output, "Output JSON (default stdout)");
    c_fit->add_option("--n-starts", fit.n_starts, "Multi-start count (default 64)");
    add_preprocess_flags(c_fit, fit.pre);
    c_fit->footer(fit_columns);

    SweepArgs sw;
    auto* c_sw = app.add_subcommand("sweep", "Stepped-sine forward and backward frequency sweeps");
    c_sw->add_option("-d,--output-dir", sw.output_dir, "Output directory")->required();
    c_sw->add_option("--u-amp", sw.u_amps, "Drive amplitudes, V (comma list)")->delimiter(',');
    c_sw->add_option("--f-lo", sw.f_lo, "Lowest frequency, Hz");
    c_sw->add_option("--f-hi", sw.f_hi, "Highest frequency, Hz");
    c_sw->add_option("--step", sw.step, "Frequency step, Hz");
    c_sw->add_option("--directions", sw.directions, "Sweep directions")
        ->check(CLI::IsMember({"forward", "backward", "both"}));
    c_sw->add_option("--drive-csv", sw.drive_csv, "Drive schedule CSV (f_hz,u_amp_v)")->check(CLI::ExistingFile);
    c_sw->add_option("--n-transient", sw.n_transient, "Transient drive cycles per point");
    c_sw->add_option("--n-fft", sw.n_fft, "Analysis cycles per point");
    c_sw->add_option("--spring", sw.spring, "Spring law")->check(CLI::IsMember({"linear", "sinusoidal"}));
    c_sw->add_option("--tol-hz", sw.tol_hz, "Backbone steps below this are neutral (default: grid step)");
    c_sw->add_option("--jump-fraction", sw.jump_fraction, "Jump threshold relative to the branch peak")
        ->capture_default_str();
    c_sw->footer(sweep_columns);

    SpringArgs sp;
    auto* c_sp = app.add_subcommand("spring-model", "Spring amplitude and stiffness against the stator gap");
    c_sp->add_option("-o,--output", sp.output, "Output CSV")->required();
    c_sp->add_option("--d-min", sp.d_min, "Smallest gap (length unit, default 2.8 cm)");
    c_sp->add_option("--d-max", sp.d_max, "Largest gap (length unit, default 5.2 cm)");
    c_sp->add_option("--d-step", sp.d_step, "Gap step (length unit, default 0.1 cm)");
    c_sp->add_option("--alpha", sp.alpha, "Spring prefactor, N m (default from the rotor geometry)");
    c_sp->footer(spring_columns);

    CoilArgs co;
    auto* c_co = app.add_subcommand("fit-coil", "Coil impedance, field constant and coupling coefficients");
    c_co->add_option("--impedance", co.impedance, "Impedance CSV")->check(CLI::ExistingFile);
    c_co->add_option("--torque", co.torque, "Quasi-static torque CSV")->check(CLI::ExistingFile);
    c_co->add_option("--emf", co.emf, "Back-EMF CSV")->check(CLI::ExistingFile);
    c_co->add_option("--field", co.field, "Coil field CSV")->check(CLI::ExistingFile);
    c_co->add_option("-o,--output", co.output, "Output JSON (default stdout)");
    c_co->footer(coil_columns);

    EnergyArgs en;
    auto* c_en = app.add_subcommand("energy-compare", "Measured against modeled dissipated energy");
    c_en->add_option("-i,--input", en.input, "Time-series CSV")->required()->check(CLI::ExistingFile);
    c_en->add_option("--fit", en.fit, "fit-ringdown JSON; without it the configured torques are used")
        ->check(CLI::ExistingFile);
    c_en->add_option("-d,--output-dir", en.output_dir, "Output directory")->required();
    add_preprocess_flags(c_en, en.pre);
    c_en->footer(energy_columns);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report_error(err, "config", 2, e.what());
        return 2;
    }

    try {
        const RunConfig cfg = resolve_config(g);
        if (c_sim->parsed()) return simulate_ringdown(cfg, sim, out);
        if (c_fit->parsed()) return fit_ringdown_cmd(cfg, fit, out);
        if (c_sw->parsed()) return sweep_cmd(cfg, sw, out);
        if (c_sp->parsed()) return spring_model_cmd(cfg, sp, out);
        if (c_co->parsed()) return fit_coil_cmd(cfg, co, out);
        if (c_en->parsed()) return energy_compare_cmd(cfg, en, out);
    } catch (const Error& e) {
        const int status = exit_status(e.code());
        report_error(err, std::string(to_string(e.code())), status, e.what());
        return status;
    } catch (const fs::filesystem_error& e) {
        report_error(err, "io", 3, e.what());
        return 3;
    } catch (const std::exception& e) {
        report_error(err, "internal", 4, e.what());
        return 4;
    }
    return 2;
}

} // namespace magspring
