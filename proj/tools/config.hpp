#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blochreach/reach.hpp"

// CLI-facing configuration: a flat mirror of the config-file keys, grouped by
// section. Precedence when assembling a run: defaults < --preset < --config
// file < individual flags.

namespace blochreach::cli {

struct AppConfig {
    // [system]
    std::string mode = "linear";  // linear | nonlinear | controlled
    double R = 1.0;               // single-trajectory runs
    double v = 1.0;
    double C = 0.0;
    double theta = 0.0;  // initial state F(theta, phi)|e>
    double phi = 0.0;
    // explicit initial amplitudes; all four set = overrides theta/phi
    std::optional<double> a_re, a_im, b_re, b_im;

    // [sweep]
    double r_min = 0.0;
    double r_max = 7.0;
    int r_count = 71;
    double v_min = 0.0;
    double v_max = 7.0;
    int v_count = 71;
    double t_max = 4.0;
    int t_samples = 201;
    int n_z = 16;
    int n_phi = 18;

    // [control]
    double kappa = 0.0;
    std::string h1 = "state_sigma_z";  // sigma_z_half | state_sigma_z
    std::string sign = "minus";        // plus | minus
    std::string target = "same";       // same | fixed
    double target_R = 0.0;
    double target_v = 0.0;
    double perturbation = 0.0;

    // [integrator]
    double dt = 1e-3;
    bool renormalize = true;
    double norm_tolerance = 1e-6;
    bool skip_failed = false;

    // [output]
    std::string dir = ".";
    bool svg = false;
};

// Thrown for anything that should exit with the configuration-error code.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parse an INI-style config into cfg (sections [system], [sweep], [control],
// [integrator], [output]; `key = value`; comments with '#' or ';'). Unknown
// sections or keys raise ConfigError naming the offender.
void apply_config_text(AppConfig& cfg, const std::string& text,
                       const std::string& source_name);
void apply_config_file(AppConfig& cfg, const std::string& path);

// Overwrite the grid/time/mode fields with a figure preset (fig1..fig5).
void apply_preset(AppConfig& cfg, const std::string& preset);
std::vector<std::string> preset_names();

// Render cfg in config-file syntax (parseable by apply_config_text).
std::string to_config_text(const AppConfig& cfg);

// Cross-field checks plus translation into engine types; both raise
// ConfigError on bad values.
void validate(const AppConfig& cfg);
SweepConfig to_sweep_config(const AppConfig& cfg);
InitialSpec initial_spec(const AppConfig& cfg);
ControlLawConfig control_config(const AppConfig& cfg);
IntegratorConfig integrator_config(const AppConfig& cfg);
SpherePartition partition(const AppConfig& cfg);

// Time grid for single-trajectory runs: t_samples rows from 0 to t_max
// inclusive (sweeps use TimeWindow::sample_times instead, which excludes 0).
std::vector<double> trajectory_grid(const AppConfig& cfg);

}  // namespace blochreach::cli
