#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace blochreach::cli {

namespace {

constexpr double pi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const auto from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
}

double parse_double(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    double out = 0.0;
    const char* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(where + ": cannot parse '" + text + "' as a number");
    }
    return out;
}

int parse_int(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    int out = 0;
    const char* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(where + ": cannot parse '" + text + "' as an integer");
    }
    return out;
}

bool parse_bool(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(where + ": cannot parse '" + text + "' as a boolean");
}

using Setter = std::function<void(AppConfig&, const std::string& where,
                                  const std::string& value)>;

const std::map<std::string, Setter>& key_table() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto dbl = [&t](const char* key, double AppConfig::* member) {
            t[key] = [member](AppConfig& c, const std::string& w,
                              const std::string& v) {
                c.*member = parse_double(w, v);
            };
        };
        auto opt_dbl = [&t](const char* key,
                            std::optional<double> AppConfig::* member) {
            t[key] = [member](AppConfig& c, const std::string& w,
                              const std::string& v) {
                c.*member = parse_double(w, v);
            };
        };
        auto integer = [&t](const char* key, int AppConfig::* member) {
            t[key] = [member](AppConfig& c, const std::string& w,
                              const std::string& v) {
                c.*member = parse_int(w, v);
            };
        };
        auto boolean = [&t](const char* key, bool AppConfig::* member) {
            t[key] = [member](AppConfig& c, const std::string& w,
                              const std::string& v) {
                c.*member = parse_bool(w, v);
            };
        };
        auto str = [&t](const char* key, std::string AppConfig::* member) {
            t[key] = [member](AppConfig& c, const std::string&,
                              const std::string& v) { c.*member = trim(v); };
        };

        str("system.mode", &AppConfig::mode);
        dbl("system.R", &AppConfig::R);
        dbl("system.v", &AppConfig::v);
        dbl("system.C", &AppConfig::C);
        dbl("system.theta", &AppConfig::theta);
        dbl("system.phi", &AppConfig::phi);
        opt_dbl("system.a_re", &AppConfig::a_re);
        opt_dbl("system.a_im", &AppConfig::a_im);
        opt_dbl("system.b_re", &AppConfig::b_re);
        opt_dbl("system.b_im", &AppConfig::b_im);

        dbl("sweep.r_min", &AppConfig::r_min);
        dbl("sweep.r_max", &AppConfig::r_max);
        integer("sweep.r_count", &AppConfig::r_count);
        dbl("sweep.v_min", &AppConfig::v_min);
        dbl("sweep.v_max", &AppConfig::v_max);
        integer("sweep.v_count", &AppConfig::v_count);
        dbl("sweep.t_max", &AppConfig::t_max);
        integer("sweep.t_samples", &AppConfig::t_samples);
        integer("sweep.n_z", &AppConfig::n_z);
        integer("sweep.n_phi", &AppConfig::n_phi);

        dbl("control.kappa", &AppConfig::kappa);
        str("control.h1", &AppConfig::h1);
        str("control.sign", &AppConfig::sign);
        str("control.target", &AppConfig::target);
        dbl("control.target_R", &AppConfig::target_R);
        dbl("control.target_v", &AppConfig::target_v);
        dbl("control.perturbation", &AppConfig::perturbation);

        dbl("integrator.dt", &AppConfig::dt);
        boolean("integrator.renormalize", &AppConfig::renormalize);
        dbl("integrator.norm_tolerance", &AppConfig::norm_tolerance);
        boolean("integrator.skip_failed", &AppConfig::skip_failed);

        str("output.dir", &AppConfig::dir);
        boolean("output.svg", &AppConfig::svg);
        return t;
    }();
    return table;
}

}  // namespace

void apply_config_text(AppConfig& cfg, const std::string& text,
                       const std::string& source_name) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of(";#");
        if (comment != std::string::npos) line.resize(comment);
        line = trim(line);
        if (line.empty()) continue;

        const std::string where =
            source_name + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(where + ": malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "system" && section != "sweep" && section != "control" &&
                section != "integrator" && section != "output") {
                throw ConfigError(where + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(where + ": empty key");
        }
        if (section.empty()) {
            throw ConfigError(where + ": key '" + key +
                              "' appears before any [section] header");
        }
        const std::string full = section + "." + key;
        const auto it = key_table().find(full);
        if (it == key_table().end()) {
            throw ConfigError(where + ": unknown key '" + key + "' in section [" +
                              section + "]");
        }
        it->second(cfg, where + ": " + full, value);
    }
}

void apply_config_file(AppConfig& cfg, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_text(cfg, buf.str(), path);
}

std::vector<std::string> preset_names() {
    return {"fig1", "fig2", "fig3", "fig4", "fig5"};
}

void apply_preset(AppConfig& cfg, const std::string& preset) {
    // Common scaffold: square grid, theta = phi = 0, full window.
    auto grid = [&cfg](double lo, double hi) {
        cfg.r_min = lo;
        cfg.r_max = hi;
        cfg.r_count = 71;
        cfg.v_min = lo;
        cfg.v_max = hi;
        cfg.v_count = 71;
        cfg.t_max = 4.0;
        cfg.t_samples = 201;
        cfg.theta = 0.0;
        cfg.phi = 0.0;
        cfg.a_re.reset();
        cfg.a_im.reset();
        cfg.b_re.reset();
        cfg.b_im.reset();
    };
    if (preset == "fig1") {
        grid(0.0, 7.0);
        cfg.mode = "linear";
    } else if (preset == "fig2") {
        grid(0.0, 7.0);
        cfg.mode = "nonlinear";
        cfg.C = 2.0;  // first panel; override with --C
    } else if (preset == "fig3") {
        grid(0.0, 7.0);
        cfg.mode = "nonlinear";
        cfg.C = 20.0;
        cfg.theta = pi / 4.0;
        cfg.phi = 0.0;
    } else if (preset == "fig4") {
        grid(0.0, 0.5);
        cfg.mode = "controlled";
    } else if (preset == "fig5") {
        grid(0.0, 7.0);
        cfg.mode = "controlled";
        cfg.t_max = 0.3;
    } else {
        throw ConfigError("unknown preset '" + preset +
                          "' (expected fig1, fig2, fig3, fig4 or fig5)");
    }
}

void validate(const AppConfig& cfg) {
    if (cfg.mode != "linear" && cfg.mode != "nonlinear" && cfg.mode != "controlled") {
        throw ConfigError("system.mode: expected linear, nonlinear or controlled, got '" +
                          cfg.mode + "'");
    }
    if (cfg.h1 != "sigma_z_half" && cfg.h1 != "state_sigma_z") {
        throw ConfigError("control.h1: expected sigma_z_half or state_sigma_z, got '" +
                          cfg.h1 + "'");
    }
    if (cfg.sign != "plus" && cfg.sign != "minus") {
        throw ConfigError("control.sign: expected plus or minus, got '" + cfg.sign +
                          "'");
    }
    if (cfg.target != "same" && cfg.target != "fixed") {
        throw ConfigError("control.target: expected same or fixed, got '" +
                          cfg.target + "'");
    }
    const int amps = int(cfg.a_re.has_value()) + int(cfg.a_im.has_value()) +
                     int(cfg.b_re.has_value()) + int(cfg.b_im.has_value());
    if (amps != 0 && amps != 4) {
        throw ConfigError(
            "system.a_re/a_im/b_re/b_im: set all four amplitudes or none");
    }
    if (cfg.t_samples < 1) {
        throw ConfigError("sweep.t_samples: must be >= 1");
    }
}

InitialSpec initial_spec(const AppConfig& cfg) {
    if (cfg.a_re.has_value()) {
        try {
            return QubitState{Complex{*cfg.a_re, *cfg.a_im},
                              Complex{*cfg.b_re, *cfg.b_im}};
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("system.a_re/a_im/b_re/b_im: ") + e.what());
        }
    }
    try {
        return TransformParams{cfg.theta, cfg.phi};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("system.theta/phi: ") + e.what());
    }
}

ControlLawConfig control_config(const AppConfig& cfg) {
    ControlLawConfig law;
    law.kappa = cfg.kappa;
    law.h1_choice = cfg.h1 == "sigma_z_half" ? ControlOperator::sigma_z_half
                                             : ControlOperator::state_dependent_sigma_z;
    law.sign_convention =
        cfg.sign == "plus" ? ControlSign::plus_f : ControlSign::minus_f;
    if (cfg.target == "fixed") {
        law.target.fixed_hamiltonian = HamiltonianParams{cfg.target_R, cfg.target_v, 0.0};
    }
    law.target.perturbation_angle = cfg.perturbation;
    try {
        law.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("control: ") + e.what());
    }
    return law;
}

IntegratorConfig integrator_config(const AppConfig& cfg) {
    IntegratorConfig icfg;
    icfg.dt = cfg.dt;
    icfg.renormalize_every_step = cfg.renormalize;
    icfg.norm_drift_tolerance = cfg.norm_tolerance;
    try {
        icfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("integrator: ") + e.what());
    }
    return icfg;
}

SpherePartition partition(const AppConfig& cfg) {
    const SpherePartition part{cfg.n_z, cfg.n_phi};
    try {
        part.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sweep.n_z/n_phi: ") + e.what());
    }
    return part;
}

SweepConfig to_sweep_config(const AppConfig& cfg) {
    validate(cfg);
    SweepConfig out;
    out.mode = cfg.mode == "linear"      ? SweepMode::linear
               : cfg.mode == "nonlinear" ? SweepMode::nonlinear
                                         : SweepMode::controlled;
    out.C = cfg.C;
    if (out.mode == SweepMode::controlled) {
        out.control = control_config(cfg);
    }
    out.r_range = {cfg.r_min, cfg.r_max, cfg.r_count};
    out.v_range = {cfg.v_min, cfg.v_max, cfg.v_count};
    out.t_window = {cfg.t_max, cfg.t_samples};
    out.initial = initial_spec(cfg);
    out.integrator = integrator_config(cfg);
    out.skip_failed_nodes = cfg.skip_failed;
    try {
        out.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return out;
}

std::vector<double> trajectory_grid(const AppConfig& cfg) {
    if (cfg.t_samples < 1) {
        throw ConfigError("sweep.t_samples: must be >= 1");
    }
    if (!(std::isfinite(cfg.t_max) && cfg.t_max >= 0.0)) {
        throw ConfigError("sweep.t_max: must be >= 0 for trajectory runs");
    }
    std::vector<double> grid;
    grid.reserve(static_cast<size_t>(cfg.t_samples));
    if (cfg.t_samples == 1) {
        grid.push_back(0.0);
        return grid;
    }
    for (int k = 0; k < cfg.t_samples; ++k) {
        grid.push_back(cfg.t_max * k / (cfg.t_samples - 1));
    }
    return grid;
}

std::string to_config_text(const AppConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "# Simulation configuration. Sections and keys as consumed by the\n"
          "# trajectory and sweep commands; flags override these values.\n\n";
    os << "[system]\n";
    os << "mode = " << cfg.mode << "            ; linear | nonlinear | controlled\n";
    os << "R = " << cfg.R << "                  ; trajectory-run level splitting\n";
    os << "v = " << cfg.v << "                  ; trajectory-run coupling\n";
    os << "C = " << cfg.C << "                  ; mean-field strength (nonlinear mode)\n";
    os << "theta = " << cfg.theta << "          ; initial state = F(theta, phi)|e>\n";
    os << "phi = " << cfg.phi << "\n";
    if (cfg.a_re.has_value()) {
        os << "a_re = " << *cfg.a_re << "\n";
        os << "a_im = " << *cfg.a_im << "\n";
        os << "b_re = " << *cfg.b_re << "\n";
        os << "b_im = " << *cfg.b_im << "\n";
    } else {
        os << "; a_re/a_im/b_re/b_im: set all four for an explicit initial state\n";
    }
    os << "\n[sweep]\n";
    os << "r_min = " << cfg.r_min << "\n";
    os << "r_max = " << cfg.r_max << "\n";
    os << "r_count = " << cfg.r_count << "\n";
    os << "v_min = " << cfg.v_min << "\n";
    os << "v_max = " << cfg.v_max << "\n";
    os << "v_count = " << cfg.v_count << "\n";
    os << "t_max = " << cfg.t_max << "\n";
    os << "t_samples = " << cfg.t_samples
       << "        ; sweep: samples in (0, t_max]; trajectory: rows incl. t=0\n";
    os << "n_z = " << cfg.n_z << "              ; sphere partition slices in p_z\n";
    os << "n_phi = " << cfg.n_phi << "            ; sphere partition azimuth slices\n";
    os << "\n[control]\n";
    os << "kappa = " << cfg.kappa << "\n";
    os << "h1 = " << cfg.h1 << "     ; sigma_z_half | state_sigma_z\n";
    os << "sign = " << cfg.sign << "             ; plus | minus\n";
    os << "target = " << cfg.target << "           ; same | fixed\n";
    os << "target_R = " << cfg.target_R << "\n";
    os << "target_v = " << cfg.target_v << "\n";
    os << "perturbation = " << cfg.perturbation
       << "       ; rotation angle applied to the target initial state\n";
    os << "\n[integrator]\n";
    os << "dt = " << cfg.dt << "\n";
    os << "renormalize = " << (cfg.renormalize ? "true" : "false") << "\n";
    os << "norm_tolerance = " << cfg.norm_tolerance << "\n";
    os << "skip_failed = " << (cfg.skip_failed ? "true" : "false")
       << "      ; sweeps: drop failing nodes instead of aborting\n";
    os << "\n[output]\n";
    os << "dir = " << cfg.dir << "\n";
    os << "svg = " << (cfg.svg ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace blochreach::cli
