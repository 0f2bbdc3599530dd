#include "magspring/config.hpp"

#include "magspring/error.hpp"
#include "magspring/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <span>
#include <sstream>
#include <system_error>

namespace magspring {

namespace pt = boost::property_tree;

namespace {

struct UnitVariant {
    const char* suffix;
    double scale;
};

constexpr UnitVariant length_units[] = {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}};

double parse_double(const std::string& text, const std::string& key) {
    double v = 0.0;
    const char* first = text.data();
    if (!text.empty() && text.front() == '+') ++first;
    const auto r = std::from_chars(first, text.data() + text.size(), v);
    require(!text.empty() && r.ec == std::errc() && r.ptr == text.data() + text.size() && std::isfinite(v),
            ErrorCode::config, "config key " + key + ": not a finite number: '" + text + "'");
    return v;
}

long parse_integer(const std::string& text, const std::string& key) {
    long v = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    require(!text.empty() && r.ec == std::errc() && r.ptr == text.data() + text.size(), ErrorCode::config,
            "config key " + key + ": not an integer: '" + text + "'");
    return v;
}

// Reads one section and remembers which keys were consumed.
class Section {
public:
    Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    std::optional<std::string> text(const std::string& key) {
        used_.insert(key);
        if (!tree_) return std::nullopt;
        const auto v = tree_->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }
    void number(const std::string& key, double& target) {
        if (const auto v = text(key)) target = parse_double(*v, full(key));
    }
    void integer(const std::string& key, int& target) {
        if (const auto v = text(key)) target = static_cast<int>(parse_integer(*v, full(key)));
    }
    // base_<suffix> for each admissible unit; at most one may be present.
    std::optional<double> quantity(const std::string& base, std::span<const UnitVariant> units) {
        std::optional<double> out;
        std::string found;
        for (const auto& u : units) {
            const std::string key = base + "_" + u.suffix;
            if (const auto v = text(key)) {
                require(!out, ErrorCode::config, "config keys " + full(found) + " and " + full(key) + " both set");
                out = parse_double(*v, full(key)) * u.scale;
                found = key;
            }
        }
        return out;
    }
    void length(const std::string& base, double& target) {
        if (const auto v = quantity(base, length_units)) target = *v;
    }
    void check_unused() const {
        if (!tree_) return;
        for (const auto& [key, child] : *tree_) {
            require(child.empty(), ErrorCode::config, "config section [" + name_ + "] has a nested entry " + key);
            require(used_.count(key) == 1, ErrorCode::config, "unknown config key " + full(key));
        }
    }

private:
    std::string full(const std::string& key) const { return "[" + name_ + "] " + key; }

    const pt::ptree* tree_;
    std::string name_;
    std::set<std::string> used_;
};

std::string lower_case(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

void read_geometry(Section& s, MagnetGeometry& g) {
    s.length("length", g.length);
    s.length("width", g.width);
    s.length("thickness", g.thickness);
    s.number("B_r_T", g.residual_flux);
}

void read_integrator(Section& s, IntegratorSettings& in) {
    s.number("rel_tol", in.rel_tol);
    s.number("abs_tol", in.abs_tol);
    s.number("max_step_s", in.max_step);
    s.number("coulomb_epsilon_rad_per_s", in.coulomb_epsilon);
    if (const auto f = s.text("friction")) {
        const std::string v = lower_case(*f);
        if (v == "event_exact") in.friction = FrictionModel::event_exact;
        else if (v == "regularized") in.friction = FrictionModel::regularized;
        else fail(ErrorCode::config, "friction must be event_exact or regularized, got '" + *f + "'");
    }
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        require(a != std::string::npos, ErrorCode::config, "config key " + key + ": empty list entry");
        out.push_back(parse_double(item.substr(a, b - a + 1), key));
    }
    require(!out.empty(), ErrorCode::config, "config key " + key + ": empty list");
    return out;
}

} // namespace

double UnitPreferences::angle_scale() const { return angle == AngleUnit::deg ? std::numbers::pi / 180.0 : 1.0; }
double UnitPreferences::length_scale() const { return length == LengthUnit::cm ? 1e-2 : 1.0; }
std::string UnitPreferences::angle_suffix() const { return angle == AngleUnit::deg ? "deg" : "rad"; }
std::string UnitPreferences::length_suffix() const { return length == LengthUnit::cm ? "cm" : "m"; }

void DrivePlan::validate() const {
    require(forward || backward, ErrorCode::config, "at least one sweep direction is required");
    require(!u_amps.empty(), ErrorCode::config, "at least one drive amplitude is required");
    for (double u : u_amps) require(std::isfinite(u) && u >= 0.0, ErrorCode::config, "drive amplitudes must be >= 0");
    if (!schedule_csv)
        require(f_lo > 0.0 && f_hi >= f_lo && step > 0.0, ErrorCode::config,
                "drive grid needs 0 < f_lo <= f_hi and step > 0");
}

double RunConfig::rotor_moment() const { return rotor_dipole ? *rotor_dipole : dipole_moment(rotor); }

double RunConfig::spring_alpha() const { return alpha ? *alpha : spring_prefactor(rotor); }

void RunConfig::validate() const {
    mechanical.validate();
    coil.validate();
    rotor.validate();
    stator.validate();
    require(loop_radius > 0.0, ErrorCode::config, "loop radius must be positive");
    require(!rotor_dipole || *rotor_dipole > 0.0, ErrorCode::config, "rotor dipole moment must be positive");
    require(!alpha || *alpha > 0.0, ErrorCode::config, "alpha must be positive");
    require(d_stator > 0.5 * stator.thickness, ErrorCode::config, "d_stator must exceed half the stator thickness");
    ringdown_integrator.validate();
    sweep.validate();
    drive.validate();
    require(n_starts >= 1, ErrorCode::config, "n_starts must be >= 1");
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(ErrorCode::config, "config line " + std::to_string(e.line()) + ": " + e.message());
    }
    static const std::set<std::string> known{"mechanical", "coil",  "rotor", "stator", "ringdown_integrator",
                                             "sweep_integrator", "drive", "fit",   "units"};
    for (const auto& [name, child] : tree) {
        require(child.data().empty(), ErrorCode::config, "config key " + name + " outside a section");
        require(known.count(name) == 1, ErrorCode::config, "unknown config section [" + name + "]");
    }
    auto section = [&](const std::string& name) {
        const auto it = tree.find(name);
        return Section(it == tree.not_found() ? nullptr : &it->second, name);
    };

    RunConfig cfg;

    Section mech = section("mechanical");
    mech.number("J_kg_m2", cfg.mechanical.inertia);
    mech.number("c_N_m_s_per_rad", cfg.mechanical.viscous);
    mech.number("T_f_N_m", cfg.mechanical.dry_friction);
    mech.number("T_amp_N_m", cfg.mechanical.spring_amp);
    mech.check_unused();

    Section coil = section("coil");
    coil.number("R_ohm", cfg.coil.resistance);
    coil.number("L_H", cfg.coil.inductance);
    coil.number("k_T_N_m_per_A", cfg.coil.k_torque);
    coil.number("k_EMF_V_s_per_rad", cfg.coil.k_emf);
    coil.number("b_I_T_per_A", cfg.coil.field_per_amp);
    coil.length("d_coil", cfg.coil.distance);
    coil.length("loop_radius", cfg.loop_radius);
    if (const auto v = coil.text("m_R_A_m2")) cfg.rotor_dipole = parse_double(*v, "[coil] m_R_A_m2");
    coil.check_unused();

    Section rotor = section("rotor");
    read_geometry(rotor, cfg.rotor);
    rotor.check_unused();

    Section stator = section("stator");
    read_geometry(stator, cfg.stator);
    stator.length("d_stator", cfg.d_stator);
    if (const auto v = stator.text("alpha_N_m")) cfg.alpha = parse_double(*v, "[stator] alpha_N_m");
    stator.check_unused();

    Section ri = section("ringdown_integrator");
    read_integrator(ri, cfg.ringdown_integrator);
    ri.check_unused();

    Section si = section("sweep_integrator");
    read_integrator(si, cfg.sweep.integrator);
    si.check_unused();

    Section drive = section("drive");
    drive.number("f_lo_hz", cfg.drive.f_lo);
    drive.number("f_hi_hz", cfg.drive.f_hi);
    drive.number("step_hz", cfg.drive.step);
    if (const auto v = drive.text("u_amp_v")) cfg.drive.u_amps = parse_list(*v, "[drive] u_amp_v");
    if (const auto v = drive.text("directions")) {
        const std::string d = lower_case(*v);
        require(d == "forward" || d == "backward" || d == "both", ErrorCode::config,
                "directions must be forward, backward or both, got '" + *v + "'");
        cfg.drive.forward = d != "backward";
        cfg.drive.backward = d != "forward";
    }
    if (const auto v = drive.text("schedule_csv")) {
        std::filesystem::path p = *v;
        cfg.drive.schedule_csv = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    drive.integer("n_fft", cfg.sweep.n_fft);
    if (const auto v = drive.text("n_transient"))
        cfg.sweep.n_transient = static_cast<int>(parse_integer(*v, "[drive] n_transient"));
    drive.integer("samples_per_cycle", cfg.sweep.samples_per_cycle);
    if (const auto v = drive.text("spring")) {
        const std::string s = lower_case(*v);
        if (s == "linear") cfg.sweep.spring = SpringModel::linear;
        else if (s == "sinusoidal") cfg.sweep.spring = SpringModel::sinusoidal;
        else fail(ErrorCode::config, "spring must be linear or sinusoidal, got '" + *v + "'");
    }
    drive.check_unused();

    Section fit = section("fit");
    fit.integer("n_starts", cfg.n_starts);
    if (const auto v = fit.text("seed")) {
        const auto r = std::from_chars(v->data(), v->data() + v->size(), cfg.seed);
        require(!v->empty() && r.ec == std::errc() && r.ptr == v->data() + v->size(), ErrorCode::config,
                "config key [fit] seed: not an unsigned integer: '" + *v + "'");
    }
    fit.check_unused();

    Section units = section("units");
    if (const auto v = units.text("angle")) {
        const std::string a = lower_case(*v);
        require(a == "deg" || a == "rad", ErrorCode::config, "angle unit must be deg or rad");
        cfg.units.angle = a == "deg" ? AngleUnit::deg : AngleUnit::rad;
    }
    if (const auto v = units.text("length")) {
        const std::string l = lower_case(*v);
        require(l == "cm" || l == "m", ErrorCode::config, "length unit must be cm or m");
        cfg.units.length = l == "cm" ? LengthUnit::cm : LengthUnit::m;
    }
    units.check_unused();

    try {
        cfg.validate();
    } catch (const Error& e) {
        fail(ErrorCode::config, std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    require(std::filesystem::is_regular_file(path), ErrorCode::config, "config file not found: " + path.string());
    return parse_config(read_text_file(path), path.parent_path());
}

} // namespace magspring
