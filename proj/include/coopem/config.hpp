// config.hpp — Plain-text experiment configuration with explicit units, figure presets

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coopem/dynamics.hpp"
#include "coopem/errors.hpp"
#include "coopem/units.hpp"

namespace coopem::cfg {

struct Diagnostic {
    int line = 0;  // 0: not tied to a line
    std::string field;
    std::string message;

    std::string str() const {
        std::ostringstream os;
        if (line > 0) os << "line " << line << ": ";
        os << field << ": " << message;
        return os.str();
    }
};

struct ConfigError : InvalidArgument {
    std::vector<Diagnostic> diagnostics;
    explicit ConfigError(std::vector<Diagnostic> d) : InvalidArgument(join(d)), diagnostics(std::move(d)) {}
    static std::string join(const std::vector<Diagnostic>& d) {
        std::string s = "config error";
        for (const auto& x : d) s += "\n  " + x.str();
        return s;
    }
};

enum class Quantity { Time, Rate, Energy, Temperature, Dimensionless, Count, Flag, Density, Speed, Potential };

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline bool read_number(const std::string& s, double& v, std::string& rest) {
    const char* p = s.c_str();
    char* end = nullptr;
    v = std::strtod(p, &end);
    if (end == p) return false;
    rest = trim(std::string(end));
    return std::isfinite(v);
}

inline std::optional<double> time_unit(const std::string& u) {
    if (u == "fs") return 1e-3;
    if (u == "ps") return 1.0;
    if (u == "ns") return 1e3;
    if (u == "us") return 1e6;
    return std::nullopt;
}

}  // namespace detail

// Value in internal units (ps, ps^-1, meV, K, kg/m^3, m/s, eV); throws InvalidArgument with a reason
inline double parse_quantity(const std::string& text, Quantity q) {
    using detail::trim;
    const std::string s = trim(text);
    if (s.empty()) throw InvalidArgument("empty value");
    if (q == Quantity::Flag) {
        if (s == "true" || s == "1" || s == "yes" || s == "on") return 1.0;
        if (s == "false" || s == "0" || s == "no" || s == "off") return 0.0;
        throw InvalidArgument("expected true/false, got '" + s + "'");
    }
    // "1/<time>" for rates
    if (q == Quantity::Rate && s.rfind("1/", 0) == 0) {
        const double t = parse_quantity(s.substr(2), Quantity::Time);
        if (!(t > 0.0)) throw InvalidArgument("lifetime must be positive");
        return 1.0 / t;
    }
    double v = 0.0;
    std::string unit;
    if (!detail::read_number(s, v, unit)) throw InvalidArgument("expected a number, got '" + s + "'");
    switch (q) {
        case Quantity::Dimensionless:
            if (!unit.empty()) throw InvalidArgument("dimensionless value takes no unit, got '" + unit + "'");
            return v;
        case Quantity::Count:
            if (!unit.empty()) throw InvalidArgument("count takes no unit");
            if (v < 0.0 || v != std::floor(v)) throw InvalidArgument("expected a non-negative integer");
            return v;
        case Quantity::Time: {
            const auto f = detail::time_unit(unit);
            if (!f) throw InvalidArgument("time needs a unit (fs, ps, ns, us), got '" + unit + "'");
            return v * *f;
        }
        case Quantity::Rate: {
            std::string u = unit;
            for (const char* pre : {"1/", "/"})
                if (u.rfind(pre, 0) == 0) {
                    const auto f = detail::time_unit(u.substr(std::string(pre).size()));
                    if (f) return v / *f;
                }
            if (u.size() > 3 && u.substr(u.size() - 3) == "^-1") {
                const auto f = detail::time_unit(u.substr(0, u.size() - 3));
                if (f) return v / *f;
            }
            throw InvalidArgument("rate needs a unit (ps^-1, ns^-1, 1/ps, ...) or the form 1/<time>, got '" + unit + "'");
        }
        case Quantity::Energy:
            if (unit == "meV") return v;
            if (unit == "eV") return v * 1e3;
            if (unit == "ueV") return v * 1e-3;
            throw InvalidArgument("energy needs a unit (ueV, meV, eV), got '" + unit + "'");
        case Quantity::Temperature:
            if (unit == "K") return v;
            if (unit == "mK") return v * 1e-3;
            throw InvalidArgument("temperature needs a unit (K, mK), got '" + unit + "'");
        case Quantity::Density:
            if (unit == "kg/m^3") return v;
            if (unit == "g/cm^3") return v * 1e3;
            throw InvalidArgument("density needs kg/m^3 or g/cm^3");
        case Quantity::Speed:
            if (unit == "m/s") return v;
            if (unit == "nm/ps") return v * 1e3;
            throw InvalidArgument("speed needs m/s or nm/ps");
        case Quantity::Potential:
            if (unit == "eV") return v;
            if (unit == "meV") return v * 1e-3;
            throw InvalidArgument("deformation potential needs eV or meV");
        default: break;
    }
    throw InvalidArgument("unsupported quantity");
}

struct ExperimentConfig {
    std::string figure = "custom";
    std::string description;

    // scenario (internal units)
    dyn::Geometry geometry = dyn::Geometry::MeasurementInduced;
    double gamma = 0.0, gamma_p = 0.0, gamma_d = 0.0, ppd_extra = 0.0;
    std::string observable = "g2";  // g2 | coherence
    std::string initial_state = "psi_S";

    // phonons
    std::string phonon_model = "none";  // none | inGaAs-deformation | ohmic
    std::optional<double> temperature;
    double omega_e_meV = 2.9, omega_h_meV = 4.4;
    double D_e = 7.0, D_h = -3.5, mass_density = 5370.0, sound_speed = 5110.0;
    double ohmic_alpha = 7.5e-5, omega_c_meV = 4.0;

    // numerics and grids
    double dt = 0.1, t_mem = 5.0, svd_threshold = 1e-8, jump_prior = 0.01, kernel_tail_tol = 1e-9;
    std::size_t max_bond = 256;
    bool richardson = false;
    double tau_max = 6000.0, tau_fine = 20.0, max_spacing = 0.0, t_settle = 0.0;
    std::size_t fine_stride = 1, coarse_points = 400;

    // fits and postprocessing
    double fit_window_min = 1.0, fit_window_max = 6000.0;
    std::optional<double> fwhm;

    // outputs
    std::string out_dir = "out";
    std::string tag;

    bool operator==(const ExperimentConfig&) const = default;

    std::optional<bath::SpectralDensity> spectral_density() const {
        if (phonon_model == "none") return std::nullopt;
        bath::SpectralDensity sd;
        if (phonon_model == "inGaAs-deformation") {
            sd = bath::SpectralDensity::inGaAs_deformation();
            sd.deformation.omega_e = units::omega_of_meV(omega_e_meV);
            sd.deformation.omega_h = units::omega_of_meV(omega_h_meV);
            sd.deformation.D_e = D_e;
            sd.deformation.D_h = D_h;
            sd.deformation.mass_density = mass_density;
            sd.deformation.sound_speed = sound_speed;
        } else {
            sd = bath::SpectralDensity::ohmic_default();
            sd.ohmic.alpha = ohmic_alpha;
            sd.ohmic.omega_c = units::omega_of_meV(omega_c_meV);
        }
        sd.temperature = temperature.value_or(4.0);
        return sd;
    }

    dyn::Scenario scenario() const {
        dyn::Scenario sc;
        sc.geometry = geometry;
        sc.lindblad.gamma = gamma;
        sc.lindblad.gamma_p = gamma_p;
        sc.lindblad.gamma_d = gamma_d;
        sc.lindblad.decay_mode =
            geometry == dyn::Geometry::Superradiant ? core::DecayMode::Superradiant : core::DecayMode::Independent;
        sc.ppd_extra = ppd_extra;
        sc.phonons = spectral_density();
        sc.grids.dt = dt;
        sc.grids.t_settle = t_settle;
        sc.grids.tau_max = tau_max;
        sc.grids.tau_fine = tau_fine;
        sc.grids.fine_stride = fine_stride;
        sc.grids.coarse_points = coarse_points;
        sc.grids.max_spacing = max_spacing;
        sc.numerics.t_mem = t_mem;
        sc.numerics.kernel_tail_tol = kernel_tail_tol;
        sc.numerics.svd_threshold = svd_threshold;
        sc.numerics.max_bond = max_bond;
        sc.numerics.jump_prior = jump_prior;
        sc.numerics.richardson = richardson;
        return sc;
    }
};

namespace detail {

inline std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

struct Entry {
    std::string value;
    int line = 0;
};

using Table = std::map<std::string, Entry>;  // "section.key"

inline Table tokenize(const std::string& text, std::vector<Diagnostic>& diag) {
    Table t;
    std::istringstream is(text);
    std::string raw, section = "experiment";
    int ln = 0;
    while (std::getline(is, raw)) {
        ++ln;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                diag.push_back({ln, "section", "unterminated section header"});
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            diag.push_back({ln, section, "expected key = value"});
            continue;
        }
        const std::string key = section + "." + trim(line.substr(0, eq));
        if (t.count(key)) diag.push_back({ln, key, "duplicate key (first on line " + std::to_string(t[key].line) + ")"});
        t[key] = {trim(line.substr(eq + 1)), ln};
    }
    return t;
}

}  // namespace detail

struct ParseResult {
    ExperimentConfig config;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

// Range and consistency checks on a filled config
inline std::vector<Diagnostic> check(const ExperimentConfig& c) {
    std::vector<Diagnostic> d;
    auto need = [&](bool ok, const std::string& f, const std::string& m) {
        if (!ok) d.push_back({0, f, m});
    };
    need(c.gamma >= 0.0, "scenario.gamma", "must be >= 0");
    need(c.gamma_p >= 0.0, "scenario.gamma_p", "must be >= 0");
    need(c.gamma_d >= 0.0, "scenario.gamma_d", "must be >= 0");
    need(c.ppd_extra >= 0.0, "scenario.ppd_extra", "must be >= 0");
    need(c.observable == "g2" || c.observable == "coherence", "scenario.observable", "must be g2 or coherence");
    need(c.initial_state == "psi_S" || c.initial_state == "psi_A" || c.initial_state == "ee" || c.initial_state == "eg",
         "scenario.initial_state", "must be psi_S, psi_A, ee or eg");
    need(c.phonon_model == "none" || c.phonon_model == "inGaAs-deformation" || c.phonon_model == "ohmic", "phonons.model",
         "must be none, inGaAs-deformation or ohmic");
    if (c.phonon_model != "none") {
        need(c.temperature.has_value(), "phonons.temperature", "required when phonons are enabled");
        if (c.temperature) need(*c.temperature > 0.0 && *c.temperature <= 400.0, "phonons.temperature", "must be in (0, 400] K");
        need(c.omega_e_meV > 0.0 && c.omega_h_meV > 0.0, "phonons.omega_e", "cutoffs must be positive");
        need(c.omega_c_meV > 0.0, "phonons.omega_c", "cutoff must be positive");
        need(c.ohmic_alpha >= 0.0, "phonons.alpha", "must be >= 0");
        need(c.t_mem >= c.dt, "numerics.t_mem", "must be >= numerics.dt");
        need(c.t_mem <= 200.0, "numerics.t_mem", "must be <= 200 ps");
    }
    need(c.dt > 0.0 && c.dt <= 5.0, "numerics.dt", "must be in (0, 5] ps");
    need(c.svd_threshold > 0.0 && c.svd_threshold <= 1e-2, "numerics.svd_threshold", "must be in (0, 1e-2]");
    need(c.max_bond >= 1 && c.max_bond <= 4096, "numerics.max_bond", "must be in [1, 4096]");
    need(c.jump_prior > 0.0 && c.jump_prior < 1.0, "numerics.jump_prior", "must be in (0, 1)");
    need(c.kernel_tail_tol >= 0.0 && c.kernel_tail_tol < 1e-2, "numerics.kernel_tail_tol", "must be in [0, 1e-2)");
    need(c.tau_max > 0.0, "grids.tau_max", "must be positive");
    need(c.tau_max >= c.dt, "grids.tau_max", "must be >= numerics.dt");
    need(c.tau_fine >= 0.0, "grids.tau_fine", "must be >= 0");
    need(c.fine_stride >= 1, "grids.fine_stride", "must be >= 1");
    need(c.coarse_points >= 1 && c.coarse_points <= 100000, "grids.coarse_points", "must be in [1, 100000]");
    need(c.max_spacing >= 0.0, "grids.max_spacing", "must be >= 0");
    need(c.t_settle >= 0.0, "grids.t_settle", "must be >= 0 (0 selects the default)");
    need(c.fit_window_min >= 0.0 && c.fit_window_max > c.fit_window_min, "fit.window_max", "window must be non-empty");
    if (c.fwhm) {
        need(*c.fwhm > 0.0, "postprocess.fwhm", "must be positive");
        if (*c.fwhm > 0.0)
            need(c.max_spacing > 0.0 && c.max_spacing + c.dt <= *c.fwhm / 10.0, "grids.max_spacing",
                 "must be set with max_spacing + dt <= fwhm/10 for convolution");
    }
    if (c.observable == "g2" && c.figure == "custom") {
        need(c.gamma > 0.0 || c.gamma_p > 0.0, "scenario.gamma", "g2 needs a radiative or pump rate");
        if (c.geometry == dyn::Geometry::MeasurementInduced && c.gamma_p == 0.0)
            need(false, "scenario.gamma_p", "zero pump gives zero stationary intensity");
    }
    need(!c.out_dir.empty(), "output.directory", "must not be empty");
    return d;
}

inline bool known_figure(const std::string& f);

inline ParseResult parse_config(const std::string& text) {
    ParseResult r;
    auto& d = r.diagnostics;
    auto t = detail::tokenize(text, d);
    ExperimentConfig& c = r.config;

    auto take = [&](const std::string& key) -> std::optional<detail::Entry> {
        const auto it = t.find(key);
        if (it == t.end()) return std::nullopt;
        detail::Entry e = it->second;
        t.erase(it);
        return e;
    };
    auto quantity = [&](const std::string& key, Quantity q, auto& field) {
        if (auto e = take(key)) {
            try {
                const double v = parse_quantity(e->value, q);
                using F = std::decay_t<decltype(field)>;
                if constexpr (std::is_same_v<F, bool>) field = v != 0.0;
                else field = static_cast<F>(v);
            } catch (const InvalidArgument& ex) {
                d.push_back({e->line, key, ex.what()});
            }
        }
    };
    auto optional_quantity = [&](const std::string& key, Quantity q, std::optional<double>& field) {
        if (auto e = take(key)) {
            if (e->value == "none") {
                field.reset();
                return;
            }
            try {
                field = parse_quantity(e->value, q);
            } catch (const InvalidArgument& ex) {
                d.push_back({e->line, key, ex.what()});
            }
        }
    };
    auto word = [&](const std::string& key, std::string& field) {
        if (auto e = take(key)) field = e->value;
    };

    word("experiment.figure", c.figure);
    word("experiment.description", c.description);
    if (!known_figure(c.figure)) d.push_back({0, "experiment.figure", "unknown figure preset '" + c.figure + "'"});

    if (auto e = take("scenario.geometry")) {
        if (e->value == "MeasurementInduced") c.geometry = dyn::Geometry::MeasurementInduced;
        else if (e->value == "Superradiant") c.geometry = dyn::Geometry::Superradiant;
        else d.push_back({e->line, "scenario.geometry", "must be MeasurementInduced or Superradiant"});
    }
    quantity("scenario.gamma", Quantity::Rate, c.gamma);
    quantity("scenario.gamma_p", Quantity::Rate, c.gamma_p);
    quantity("scenario.gamma_d", Quantity::Rate, c.gamma_d);
    quantity("scenario.ppd_extra", Quantity::Rate, c.ppd_extra);
    word("scenario.observable", c.observable);
    word("scenario.initial_state", c.initial_state);

    word("phonons.model", c.phonon_model);
    optional_quantity("phonons.temperature", Quantity::Temperature, c.temperature);
    quantity("phonons.omega_e", Quantity::Energy, c.omega_e_meV);
    quantity("phonons.omega_h", Quantity::Energy, c.omega_h_meV);
    quantity("phonons.D_e", Quantity::Potential, c.D_e);
    quantity("phonons.D_h", Quantity::Potential, c.D_h);
    quantity("phonons.mass_density", Quantity::Density, c.mass_density);
    quantity("phonons.sound_speed", Quantity::Speed, c.sound_speed);
    quantity("phonons.alpha", Quantity::Dimensionless, c.ohmic_alpha);
    quantity("phonons.omega_c", Quantity::Energy, c.omega_c_meV);

    quantity("numerics.dt", Quantity::Time, c.dt);
    quantity("numerics.t_mem", Quantity::Time, c.t_mem);
    quantity("numerics.svd_threshold", Quantity::Dimensionless, c.svd_threshold);
    quantity("numerics.max_bond", Quantity::Count, c.max_bond);
    quantity("numerics.jump_prior", Quantity::Dimensionless, c.jump_prior);
    quantity("numerics.kernel_tail_tol", Quantity::Dimensionless, c.kernel_tail_tol);
    quantity("numerics.richardson", Quantity::Flag, c.richardson);

    quantity("grids.tau_max", Quantity::Time, c.tau_max);
    quantity("grids.tau_fine", Quantity::Time, c.tau_fine);
    quantity("grids.fine_stride", Quantity::Count, c.fine_stride);
    quantity("grids.coarse_points", Quantity::Count, c.coarse_points);
    quantity("grids.max_spacing", Quantity::Time, c.max_spacing);
    quantity("grids.t_settle", Quantity::Time, c.t_settle);

    quantity("fit.window_min", Quantity::Time, c.fit_window_min);
    quantity("fit.window_max", Quantity::Time, c.fit_window_max);
    optional_quantity("postprocess.fwhm", Quantity::Time, c.fwhm);

    word("output.directory", c.out_dir);
    word("output.tag", c.tag);

    for (const auto& [k, e] : t) d.push_back({e.line, k, "unknown key"});
    for (auto& x : check(c)) {
        const bool seen = std::any_of(d.begin(), d.end(), [&](const Diagnostic& y) { return y.field == x.field; });
        if (!seen) d.push_back(x);
    }
    return r;
}

inline ExperimentConfig load_config(const std::string& text) {
    auto r = parse_config(text);
    if (!r.ok()) throw ConfigError(r.diagnostics);
    return r.config;
}

// Canonical text; parse_config(to_text(c)).config == c
inline std::string to_text(const ExperimentConfig& c) {
    using detail::num;
    std::ostringstream os;
    os << "[experiment]\nfigure = " << c.figure << "\n";
    if (!c.description.empty()) os << "description = " << c.description << "\n";
    os << "\n[scenario]\ngeometry = " << dyn::to_string(c.geometry) << "\n";
    os << "gamma = " << num(c.gamma) << " ps^-1\n";
    os << "gamma_p = " << num(c.gamma_p) << " ps^-1\n";
    os << "gamma_d = " << num(c.gamma_d) << " ps^-1\n";
    os << "ppd_extra = " << num(c.ppd_extra) << " ps^-1\n";
    os << "observable = " << c.observable << "\ninitial_state = " << c.initial_state << "\n";
    os << "\n[phonons]\nmodel = " << c.phonon_model << "\n";
    os << "temperature = " << (c.temperature ? num(*c.temperature) + " K" : std::string("none")) << "\n";
    os << "omega_e = " << num(c.omega_e_meV) << " meV\nomega_h = " << num(c.omega_h_meV) << " meV\n";
    os << "D_e = " << num(c.D_e) << " eV\nD_h = " << num(c.D_h) << " eV\n";
    os << "mass_density = " << num(c.mass_density) << " kg/m^3\nsound_speed = " << num(c.sound_speed) << " m/s\n";
    os << "alpha = " << num(c.ohmic_alpha) << "\nomega_c = " << num(c.omega_c_meV) << " meV\n";
    os << "\n[numerics]\ndt = " << num(c.dt) << " ps\nt_mem = " << num(c.t_mem) << " ps\n";
    os << "svd_threshold = " << num(c.svd_threshold) << "\nmax_bond = " << c.max_bond << "\n";
    os << "jump_prior = " << num(c.jump_prior) << "\nkernel_tail_tol = " << num(c.kernel_tail_tol) << "\n";
    os << "richardson = " << (c.richardson ? "true" : "false") << "\n";
    os << "\n[grids]\ntau_max = " << num(c.tau_max) << " ps\ntau_fine = " << num(c.tau_fine) << " ps\n";
    os << "fine_stride = " << c.fine_stride << "\ncoarse_points = " << c.coarse_points << "\n";
    os << "max_spacing = " << num(c.max_spacing) << " ps\nt_settle = " << num(c.t_settle) << " ps\n";
    os << "\n[fit]\nwindow_min = " << num(c.fit_window_min) << " ps\nwindow_max = " << num(c.fit_window_max) << " ps\n";
    os << "\n[postprocess]\nfwhm = " << (c.fwhm ? num(*c.fwhm) + " ps" : std::string("none")) << "\n";
    os << "\n[output]\ndirectory = " << c.out_dir << "\n";
    if (!c.tag.empty()) os << "tag = " << c.tag << "\n";
    return os.str();
}

// ---- presets ----

struct Preset {
    std::string name;
    std::string summary;
    std::string text;
};

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> p = {
        {"fig2a", "MeasurementInduced g2: superohmic, ohmic, PPD and drop-model fits",
         R"(# Spatially separated emitters, gamma^-1 = gamma_p^-1 = 1.76 ns
[experiment]
figure = fig2a
[scenario]
geometry = MeasurementInduced
gamma = 1/1.76 ns
gamma_p = 1/1.76 ns
[phonons]
model = inGaAs-deformation
temperature = 4 K
omega_e = 2.9 meV
omega_h = 4.4 meV
D_e = 7.0 eV
D_h = -3.5 eV
mass_density = 5370 kg/m^3
sound_speed = 5110 m/s
alpha = 7.5e-5             # ohmic comparison
omega_c = 4 meV
[grids]
tau_max = 6 ns
[fit]
window_min = 1 ps
window_max = 6 ns
)"},
        {"fig2b", "MeasurementInduced g2: superohmic with added PPD (221 ps, 199 ps) and PPD only",
         R"(# PPD rates: 221 ps and 199 ps variants
[experiment]
figure = fig2b
[scenario]
geometry = MeasurementInduced
gamma = 1/1.76 ns
gamma_p = 1/1.76 ns
[phonons]
model = inGaAs-deformation
temperature = 4 K
[grids]
tau_max = 6 ns
)"},
        {"fig2c", "Inter-emitter coherence from |Psi_S>: superohmic, PPD 3.9 ns, ohmic",
         R"(# Pump and decay disabled; log time axis
[experiment]
figure = fig2c
[scenario]
observable = coherence
initial_state = psi_S
[phonons]
model = inGaAs-deformation
temperature = 4 K
[grids]
tau_max = 10 ns
)"},
        {"fig2d", "Inter-emitter coherence from |Psi_S>: superohmic, superohmic + PPD 221 ps, PPD 221 ps",
         R"([experiment]
figure = fig2d
[scenario]
observable = coherence
initial_state = psi_S
[phonons]
model = inGaAs-deformation
temperature = 4 K
[grids]
tau_max = 10 ns
)"},
        {"fig4", "Superradiant g2 for gamma_p/gamma in {0.1, 1, 10} x {none, superohmic, PPD 199 ps}",
         R"(# gamma^-1 = 1.76 ns; pump ratios reconstructed
[experiment]
figure = fig4
[scenario]
geometry = Superradiant
gamma = 1/1.76 ns
[phonons]
model = inGaAs-deformation
temperature = 4 K
[grids]
tau_max = 6 ns
coarse_points = 200
)"},
        {"fig5", "Superradiant g2, gamma_p = 2 gamma: superohmic vs PPD 3.9 ns",
         R"(# gamma^-1 = 1.76 ns, gamma_p = 2 gamma
[experiment]
figure = fig5
[scenario]
geometry = Superradiant
gamma = 1/1.76 ns
gamma_p = 1/0.88 ns
[phonons]
model = inGaAs-deformation
temperature = 4 K
[grids]
tau_max = 6 ns
coarse_points = 200
)"},
        {"fig6", "fig2a, fig2b, fig4 (none), fig5 curves convolved with a 240 ps Gaussian IRF",
         R"(# Gaussian instrument response, FWHM about 240 ps
[experiment]
figure = fig6
[scenario]
gamma = 1/1.76 ns
gamma_p = 1/1.76 ns
[phonons]
model = inGaAs-deformation
temperature = 4 K
[grids]
tau_max = 6 ns
max_spacing = 20 ps
[postprocess]
fwhm = 240 ps
)"},
        {"markov-check", "Phonon-free pipeline vs quantum regression, both geometries, three pump ratios",
         R"([experiment]
figure = markov-check
[scenario]
gamma = 1/1.76 ns
[numerics]
dt = 1 ps
[grids]
tau_max = 6 ns
coarse_points = 100
)"},
    };
    return p;
}

inline bool known_figure(const std::string& f) {
    if (f == "custom") return true;
    for (const auto& p : presets())
        if (p.name == f) return true;
    return false;
}

inline const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

}  // namespace coopem::cfg
