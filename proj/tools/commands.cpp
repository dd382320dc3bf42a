#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blochreach/dynamics.hpp"
#include "blochreach/lyapunov.hpp"
#include "blochreach/reach.hpp"
#include "config.hpp"
#include "writers.hpp"

namespace fs = std::filesystem;

namespace blochreach::cli {
namespace {

// Flags stay unset unless given, so precedence is simply
// defaults < --preset < --config < flags.
struct Overrides {
    std::optional<std::string> preset;
    std::optional<std::string> config_path;

    std::optional<std::string> mode;
    std::optional<double> R, v, C, theta, phi;
    std::optional<double> a_re, a_im, b_re, b_im;

    std::optional<double> r_min, r_max, v_min, v_max, t_max;
    std::optional<int> r_count, v_count, t_samples, n_z, n_phi;

    std::optional<double> kappa, target_R, target_v, perturbation;
    std::optional<std::string> h1, sign, target;

    std::optional<double> dt, norm_tolerance;
    std::optional<bool> renormalize, skip_failed;

    std::optional<std::string> dir;
    std::optional<bool> svg;

    std::optional<int> workers;
};

template <typename T>
void take(std::optional<T>& src, T& dst) {
    if (src) dst = *src;
}

AppConfig assemble(const Overrides& ov) {
    AppConfig cfg;
    if (ov.preset) apply_preset(cfg, *ov.preset);
    if (ov.config_path) apply_config_file(cfg, *ov.config_path);

    Overrides o = ov;
    take(o.mode, cfg.mode);
    take(o.R, cfg.R);
    take(o.v, cfg.v);
    take(o.C, cfg.C);
    take(o.theta, cfg.theta);
    take(o.phi, cfg.phi);
    if (o.a_re) cfg.a_re = *o.a_re;
    if (o.a_im) cfg.a_im = *o.a_im;
    if (o.b_re) cfg.b_re = *o.b_re;
    if (o.b_im) cfg.b_im = *o.b_im;
    take(o.r_min, cfg.r_min);
    take(o.r_max, cfg.r_max);
    take(o.r_count, cfg.r_count);
    take(o.v_min, cfg.v_min);
    take(o.v_max, cfg.v_max);
    take(o.v_count, cfg.v_count);
    take(o.t_max, cfg.t_max);
    take(o.t_samples, cfg.t_samples);
    take(o.n_z, cfg.n_z);
    take(o.n_phi, cfg.n_phi);
    take(o.kappa, cfg.kappa);
    take(o.h1, cfg.h1);
    take(o.sign, cfg.sign);
    take(o.target, cfg.target);
    take(o.target_R, cfg.target_R);
    take(o.target_v, cfg.target_v);
    take(o.perturbation, cfg.perturbation);
    take(o.dt, cfg.dt);
    take(o.norm_tolerance, cfg.norm_tolerance);
    take(o.renormalize, cfg.renormalize);
    take(o.skip_failed, cfg.skip_failed);
    take(o.dir, cfg.dir);
    take(o.svg, cfg.svg);

    validate(cfg);
    return cfg;
}

int resolve_workers(const Overrides& ov) {
    if (ov.workers) {
        if (*ov.workers < 1) throw ConfigError("--workers must be >= 1");
        return *ov.workers;
    }
    if (const char* env = std::getenv("BLOCHREACH_WORKERS")) {
        int w = 0;
        try {
            w = std::stoi(env);
        } catch (const std::exception&) {
            throw ConfigError(
                "BLOCHREACH_WORKERS is not an integer: " + std::string(env));
        }
        if (w < 1) {
            throw ConfigError("BLOCHREACH_WORKERS must be >= 1, got " +
                              std::string(env));
        }
        return w;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

fs::path ensure_out_dir(const AppConfig& cfg) {
    fs::path dir{cfg.dir};
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + cfg.dir +
                          "': " + ec.message());
    }
    return dir;
}

std::string join_args(int argc, const char* const* argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void report_skipped(const PointCloud& cloud) {
    for (const auto& f : cloud.skipped) {
        std::cerr << "warning: skipped node (R = " << f.R << ", v = " << f.v
                  << "): " << f.message << '\n';
    }
}

int cmd_trajectory(const Overrides& ov, const std::string& invocation) {
    const auto start = Clock::now();
    const AppConfig cfg = assemble(ov);
    const fs::path dir = ensure_out_dir(cfg);
    const std::vector<double> grid = trajectory_grid(cfg);
    const QubitState s0 = initial_state_of(initial_spec(cfg));
    const IntegratorConfig integ = integrator_config(cfg);
    const HamiltonianParams hp{cfg.R, cfg.v, cfg.C};

    std::string csv;
    if (cfg.mode == "controlled") {
        const ControlledRun run =
            run_controlled(hp, s0, control_config(cfg), grid, integ);
        csv = controlled_csv(run);
    } else if (cfg.mode == "nonlinear") {
        csv = trajectory_csv(sample_trajectory(hp, s0, grid, integ));
    } else {
        Trajectory tr;
        tr.samples.reserve(grid.size());
        for (double t : grid) {
            const QubitState st = propagate_linear(hp, s0, t);
            tr.samples.push_back({t, st, bloch_from_state(st)});
        }
        csv = trajectory_csv(tr);
    }

    const std::string csv_path = (dir / "trajectory.csv").string();
    write_file_atomic(csv_path, csv);
    const std::string manifest_path = (dir / "manifest.json").string();
    write_file_atomic(manifest_path,
                      manifest_json(cfg, invocation, {csv_path}, 1,
                                    seconds_since(start)));
    std::cout << "wrote " << csv_path << " (" << grid.size() << " rows)\n";
    return 0;
}

int cmd_sweep(const Overrides& ov, const std::string& invocation) {
    const auto start = Clock::now();
    const AppConfig cfg = assemble(ov);
    const int workers = resolve_workers(ov);
    const fs::path dir = ensure_out_dir(cfg);

    const PointCloud cloud = run_sweep(to_sweep_config(cfg), workers);
    report_skipped(cloud);
    const CoverageReport report = coverage(cloud, partition(cfg));

    std::vector<std::string> outputs;
    const std::string cloud_path = (dir / "cloud.csv").string();
    write_file_atomic(cloud_path, cloud_csv(cloud));
    outputs.push_back(cloud_path);
    const std::string cov_path = (dir / "coverage.json").string();
    write_file_atomic(cov_path, coverage_json(cfg, report));
    outputs.push_back(cov_path);
    if (cfg.svg) {
        const std::string plus = (dir / "cloud_from_plus_y.svg").string();
        const std::string minus = (dir / "cloud_from_minus_y.svg").string();
        write_file_atomic(plus, cloud_svg(cloud, true));
        write_file_atomic(minus, cloud_svg(cloud, false));
        outputs.push_back(plus);
        outputs.push_back(minus);
    }
    const std::string manifest_path = (dir / "manifest.json").string();
    write_file_atomic(manifest_path,
                      manifest_json(cfg, invocation, outputs, workers,
                                    seconds_since(start)));
    outputs.push_back(manifest_path);

    std::cout << "coverage " << format_double(report.coverage) << " ("
              << report.occupied_cells << "/" << report.total_cells
              << " cells) from " << cloud.points.size() << " points";
    if (!cloud.skipped.empty()) {
        std::cout << ", " << cloud.skipped.size() << " nodes skipped";
    }
    std::cout << '\n';
    for (const auto& o : outputs) std::cout << "wrote " << o << '\n';
    return 0;
}

int cmd_compare(const std::vector<std::string>& files,
                const std::string& out_dir) {
    std::vector<CoverageRow> rows;
    rows.reserve(files.size());
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot open '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("cannot parse '" + path + "': " + e.what());
        }
        if (!j.contains("coverage") || !j["coverage"].is_number()) {
            throw ConfigError("'" + path + "' has no numeric 'coverage' key");
        }
        CoverageRow row;
        row.label = path;
        row.coverage = j["coverage"].get<double>();
        row.delta_vs_first = rows.empty() ? 0.0 : row.coverage - rows.front().coverage;
        rows.push_back(std::move(row));
    }

    std::cout << compare_table(rows);
    fs::path dir{out_dir};
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + out_dir +
                          "': " + ec.message());
    }
    const std::string json_path = (dir / "compare.json").string();
    write_file_atomic(json_path, compare_json(rows));
    std::cout << "wrote " << json_path << '\n';
    return 0;
}

int cmd_defaults(const std::optional<std::string>& out_path) {
    const std::string text = to_config_text(AppConfig{});
    if (out_path) {
        write_file_atomic(*out_path, text);
        std::cout << "wrote " << *out_path << '\n';
    } else {
        std::cout << text;
    }
    return 0;
}

void add_run_options(CLI::App* sub, Overrides& ov, bool sweep_grid) {
    sub->add_option("--preset", ov.preset,
                    "figure preset: fig1 fig2 fig3 fig4 fig5");
    sub->add_option("--config", ov.config_path, "config file (INI sections)");

    sub->add_option("--mode", ov.mode,
                    "linear | nonlinear | controlled (default linear)");
    sub->add_option("--R", ov.R, "level splitting (default 1)");
    sub->add_option("--v", ov.v, "coupling strength (default 1)");
    sub->add_option("--C", ov.C, "mean-field strength (default 0)");
    sub->add_option("--theta", ov.theta,
                    "initial-state polar angle, [0, pi] (default 0)");
    sub->add_option("--phi", ov.phi,
                    "initial-state azimuth, [0, 2pi) (default 0)");
    sub->add_option("--a-re", ov.a_re, "explicit initial amplitude Re a");
    sub->add_option("--a-im", ov.a_im, "explicit initial amplitude Im a");
    sub->add_option("--b-re", ov.b_re, "explicit initial amplitude Re b");
    sub->add_option("--b-im", ov.b_im, "explicit initial amplitude Im b");

    if (sweep_grid) {
        sub->add_option("--r-min", ov.r_min, "R grid start (default 0)");
        sub->add_option("--r-max", ov.r_max, "R grid end (default 7)");
        sub->add_option("--r-count", ov.r_count, "R grid points (default 71)");
        sub->add_option("--v-min", ov.v_min, "v grid start (default 0)");
        sub->add_option("--v-max", ov.v_max, "v grid end (default 7)");
        sub->add_option("--v-count", ov.v_count, "v grid points (default 71)");
        sub->add_option("--n-z", ov.n_z, "partition slices in p_z (default 16)");
        sub->add_option("--n-phi", ov.n_phi,
                        "partition slices in azimuth (default 18)");
        sub->add_option("--workers", ov.workers,
                        "worker threads, >= 1 (default: BLOCHREACH_WORKERS "
                        "env or hardware concurrency)");
    }
    sub->add_option("--t-max", ov.t_max, "time window end (default 4)");
    sub->add_option("--t-samples", ov.t_samples,
                    "samples per trajectory (default 201)");

    sub->add_option("--kappa", ov.kappa, "control gain, >= 0 (default 0)");
    sub->add_option("--h1", ov.h1,
                    "control operator: sigma_z_half | state_sigma_z "
                    "(default state_sigma_z)");
    sub->add_option("--sign", ov.sign,
                    "feedback sign convention: plus | minus (default minus)");
    sub->add_option("--target", ov.target,
                    "target Hamiltonian: same | fixed (default same)");
    sub->add_option("--target-R", ov.target_R,
                    "target splitting when --target fixed (default 0)");
    sub->add_option("--target-v", ov.target_v,
                    "target coupling when --target fixed (default 0)");
    sub->add_option("--perturbation", ov.perturbation,
                    "y-rotation angle separating target from system "
                    "(default 0)");

    sub->add_option("--dt", ov.dt, "integrator step (default 0.001)");
    sub->add_flag_callback(
        "--renormalize", [&ov] { ov.renormalize = true; },
        "project out norm drift every step (default)");
    sub->add_flag_callback(
        "--no-renormalize", [&ov] { ov.renormalize = false; },
        "keep raw RK4 norms and enforce the drift tolerance");
    sub->add_option("--norm-tolerance", ov.norm_tolerance,
                    "allowed |norm - 1| without renormalization "
                    "(default 1e-6)");
    if (sweep_grid) {
        sub->add_flag_callback(
            "--skip-failed", [&ov] { ov.skip_failed = true; },
            "drop failing sweep nodes instead of aborting");
        sub->add_flag_callback(
            "--no-skip-failed", [&ov] { ov.skip_failed = false; },
            "abort the sweep on the first failing node (default)");
        sub->add_flag_callback("--svg", [&ov] { ov.svg = true; },
                               "write the two orthographic SVG projections");
        sub->add_flag_callback("--no-svg", [&ov] { ov.svg = false; },
                               "disable SVG output (default)");
    }
    sub->add_option("--dir", ov.dir, "output directory (default .)");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{
        "blochreach: reachable sets of a driven two-level system on the "
        "Bloch sphere (linear, mean-field and feedback-controlled modes)"};
    app.require_subcommand(1);

    Overrides ov;
    CLI::App* traj = app.add_subcommand(
        "trajectory", "integrate a single run and write trajectory.csv");
    add_run_options(traj, ov, false);
    CLI::App* sweep = app.add_subcommand(
        "sweep",
        "sweep the (R, v) grid, write cloud.csv / coverage.json / "
        "manifest.json");
    add_run_options(sweep, ov, true);

    std::vector<std::string> compare_files;
    std::string compare_dir = ".";
    CLI::App* compare = app.add_subcommand(
        "compare", "tabulate coverage.json files against the first");
    compare->add_option("files", compare_files, "coverage.json files")
        ->required()
        ->expected(-1);
    compare->add_option("--dir", compare_dir,
                        "output directory for compare.json (default .)");

    std::optional<std::string> defaults_out;
    CLI::App* defaults = app.add_subcommand(
        "defaults", "print the built-in defaults as a config file");
    defaults->add_option("--out", defaults_out,
                         "write to this path instead of standard output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string invocation = join_args(argc, argv);
    try {
        if (traj->parsed()) return cmd_trajectory(ov, invocation);
        if (sweep->parsed()) return cmd_sweep(ov, invocation);
        if (compare->parsed()) return cmd_compare(compare_files, compare_dir);
        return cmd_defaults(defaults_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IntegratorError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const SweepError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace blochreach::cli
