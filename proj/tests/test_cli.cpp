#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <charconv>
#include <clocale>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "config.hpp"
#include "json.hpp"
#include "writers.hpp"

#include "blochreach/reach.hpp"

using namespace blochreach;
using namespace blochreach::cli;
namespace fsys = std::filesystem;

namespace {

std::string read_file(const fsys::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return {};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> out;
    std::string line;
    std::istringstream in(s);
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::vector<double> csv_fields(const std::string& line) {
    std::vector<double> out;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

std::string bin_path() {
    const char* b = std::getenv("BLOCHREACH_BIN");
    REQUIRE_MESSAGE(b != nullptr, "BLOCHREACH_BIN must point at the binary");
    return b;
}

fsys::path scratch_dir(const std::string& name) {
    const fsys::path dir =
        fsys::temp_directory_path() / "blochreach_cli_tests" / name;
    fsys::remove_all(dir);
    fsys::create_directories(dir);
    return dir;
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Shell out to the real binary; args is a raw shell fragment.
RunResult run_bin(const std::string& args, const fsys::path& dir,
                  const std::string& env_prefix = "") {
    const fsys::path out = dir / "stdout.txt";
    const fsys::path err = dir / "stderr.txt";
    const std::string cmd = env_prefix + "\"" + bin_path() + "\" " + args +
                            " > \"" + out.string() + "\" 2> \"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    RunResult r;
    if (status >= 0 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("format_double: plain values print without noise") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.0) == "-2");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.02) == "0.02");
    CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("format_double: 17 significant digits round-trip any double") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    auto roundtrip = [](double x) {
        const std::string s = format_double(x);
        double back = 0.0;
        const auto res =
            std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(res.ec == std::errc{});
        return back;
    };
    for (int i = 0; i < 500; ++i) {
        const double x = std::ldexp(mant(rng), expo(rng));
        CHECK(roundtrip(x) == x);
    }
    CHECK(roundtrip(5e-324) == 5e-324);  // smallest denormal
    CHECK(roundtrip(1.7976931348623157e308) == 1.7976931348623157e308);
}

TEST_CASE("format_double: immune to the global locale") {
    if (std::setlocale(LC_ALL, "de_DE.UTF-8") != nullptr) {
        CHECK(format_double(0.5) == "0.5");
        CHECK(format_double(1234.5) == "1234.5");
    }
    std::setlocale(LC_ALL, "C");
}

TEST_CASE("config text: sections, comments and whitespace") {
    AppConfig cfg;
    apply_config_text(cfg,
                      "# leading comment\n"
                      "[system]\n"
                      "mode = nonlinear   ; trailing comment\n"
                      "  C =   20\n"
                      "theta=0.7853981633974483\n"
                      "\n"
                      "[sweep]\n"
                      "r_count = 11\n"
                      "t_max = 2.5\n"
                      "[integrator]\n"
                      "renormalize = no\n"
                      "dt = 1e-4\n"
                      "[output]\n"
                      "svg = yes\n",
                      "inline");
    CHECK(cfg.mode == "nonlinear");
    CHECK(cfg.C == 20.0);
    CHECK(cfg.theta == 0.7853981633974483);
    CHECK(cfg.r_count == 11);
    CHECK(cfg.t_max == 2.5);
    CHECK(cfg.renormalize == false);
    CHECK(cfg.dt == 1e-4);
    CHECK(cfg.svg == true);
    CHECK(cfg.R == 1.0);  // untouched keys keep their defaults
}

TEST_CASE("config text: errors name the offender and the location") {
    AppConfig cfg;
    auto message_of = [&cfg](const std::string& text) {
        try {
            apply_config_text(cfg, text, "bad.cfg");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string{};
    };

    std::string m = message_of("[system]\nbogus = 1\n");
    CHECK(m.find("bogus") != std::string::npos);
    CHECK(m.find("bad.cfg:2") != std::string::npos);

    m = message_of("[junk]\n");
    CHECK(m.find("junk") != std::string::npos);

    m = message_of("[sweep]\nr_count = few\n");
    CHECK(m.find("r_count") != std::string::npos);
    CHECK(m.find("few") != std::string::npos);

    m = message_of("[system]\nR = 1..2\n");
    CHECK(m.find("1..2") != std::string::npos);

    m = message_of("mode = linear\n");  // key before any section
    CHECK(m.find("mode") != std::string::npos);

    m = message_of("[integrator]\nrenormalize = maybe\n");
    CHECK(m.find("maybe") != std::string::npos);

    m = message_of("[system\n");
    CHECK(m.find("section") != std::string::npos);

    CHECK_THROWS_AS(apply_config_file(cfg, "/no/such/file.cfg"), ConfigError);
}

TEST_CASE("config text: round-trips through to_config_text") {
    AppConfig cfg;
    cfg.mode = "controlled";
    cfg.R = 0.25;
    cfg.v = 1.5;
    cfg.C = 3.75;
    cfg.theta = 0.1;
    cfg.phi = 5.0;
    cfg.a_re = 0.6;
    cfg.a_im = 0.0;
    cfg.b_re = 0.8;
    cfg.b_im = 0.0;
    cfg.r_min = 0.5;
    cfg.r_max = 6.5;
    cfg.r_count = 13;
    cfg.v_min = 0.25;
    cfg.v_max = 5.25;
    cfg.v_count = 21;
    cfg.t_max = 0.3;
    cfg.t_samples = 77;
    cfg.n_z = 8;
    cfg.n_phi = 9;
    cfg.kappa = 27.0;
    cfg.h1 = "sigma_z_half";
    cfg.sign = "plus";
    cfg.target = "fixed";
    cfg.target_R = 0.125;
    cfg.target_v = 0.375;
    cfg.perturbation = 0.01;
    cfg.dt = 12.5e-4;
    cfg.renormalize = false;
    cfg.norm_tolerance = 1e-9;
    cfg.skip_failed = true;
    cfg.dir = "out";
    cfg.svg = true;

    AppConfig back;
    apply_config_text(back, to_config_text(cfg), "generated");
    CHECK(back.mode == cfg.mode);
    CHECK(back.R == cfg.R);
    CHECK(back.v == cfg.v);
    CHECK(back.C == cfg.C);
    CHECK(back.theta == cfg.theta);
    CHECK(back.phi == cfg.phi);
    REQUIRE(back.a_re.has_value());
    CHECK(*back.a_re == 0.6);
    CHECK(*back.b_re == 0.8);
    CHECK(back.r_min == cfg.r_min);
    CHECK(back.r_max == cfg.r_max);
    CHECK(back.r_count == cfg.r_count);
    CHECK(back.v_count == cfg.v_count);
    CHECK(back.t_max == cfg.t_max);
    CHECK(back.t_samples == cfg.t_samples);
    CHECK(back.n_z == cfg.n_z);
    CHECK(back.n_phi == cfg.n_phi);
    CHECK(back.kappa == cfg.kappa);
    CHECK(back.h1 == cfg.h1);
    CHECK(back.sign == cfg.sign);
    CHECK(back.target == cfg.target);
    CHECK(back.target_R == cfg.target_R);
    CHECK(back.target_v == cfg.target_v);
    CHECK(back.perturbation == cfg.perturbation);
    CHECK(back.dt == cfg.dt);
    CHECK(back.renormalize == cfg.renormalize);
    CHECK(back.norm_tolerance == cfg.norm_tolerance);
    CHECK(back.skip_failed == cfg.skip_failed);
    CHECK(back.dir == cfg.dir);
    CHECK(back.svg == cfg.svg);
}

TEST_CASE("presets encode the reference parameter sets") {
    CHECK(preset_names() ==
          std::vector<std::string>{"fig1", "fig2", "fig3", "fig4", "fig5"});

    AppConfig cfg;
    cfg.mode = "controlled";  // junk that the preset must reset
    cfg.theta = 2.0;
    cfg.a_re = cfg.a_im = cfg.b_re = cfg.b_im = 0.5;
    apply_preset(cfg, "fig1");
    CHECK(cfg.mode == "linear");
    CHECK(cfg.r_min == 0.0);
    CHECK(cfg.r_max == 7.0);
    CHECK(cfg.r_count == 71);
    CHECK(cfg.v_max == 7.0);
    CHECK(cfg.t_max == 4.0);
    CHECK(cfg.t_samples == 201);
    CHECK(cfg.theta == 0.0);
    CHECK(!cfg.a_re.has_value());

    apply_preset(cfg, "fig2");
    CHECK(cfg.mode == "nonlinear");
    CHECK(cfg.C == 2.0);

    apply_preset(cfg, "fig3");
    CHECK(cfg.mode == "nonlinear");
    CHECK(cfg.C == 20.0);
    CHECK(cfg.theta == doctest::Approx(0.7853981633974483).epsilon(1e-15));
    CHECK(cfg.phi == 0.0);

    apply_preset(cfg, "fig4");
    CHECK(cfg.mode == "controlled");
    CHECK(cfg.r_max == 0.5);
    CHECK(cfg.v_max == 0.5);
    CHECK(cfg.t_max == 4.0);

    apply_preset(cfg, "fig5");
    CHECK(cfg.mode == "controlled");
    CHECK(cfg.r_max == 7.0);
    CHECK(cfg.t_max == 0.3);

    CHECK_THROWS_AS(apply_preset(cfg, "fig9"), ConfigError);
}

TEST_CASE("validation rejects bad enums and partial amplitudes") {
    AppConfig cfg;
    cfg.mode = "quadratic";
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg.mode = "linear";
    cfg.h1 = "sigma_x";
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg.h1 = "state_sigma_z";
    cfg.a_re = 1.0;  // only one of four amplitudes
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg.a_im = 0.0;
    cfg.b_re = 0.0;
    cfg.b_im = 0.0;
    CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("engine translation: initial state, control law, sweep config") {
    AppConfig cfg;

    SUBCASE("angles give a transform, amplitudes an explicit state") {
        cfg.theta = 0.5;
        cfg.phi = 1.0;
        const InitialSpec spec = initial_spec(cfg);
        REQUIRE(std::holds_alternative<TransformParams>(spec));
        CHECK(std::get<TransformParams>(spec).theta() == 0.5);

        cfg.a_re = 0.6;
        cfg.a_im = 0.0;
        cfg.b_re = 0.8;
        cfg.b_im = 0.0;
        const InitialSpec explicit_spec = initial_spec(cfg);
        REQUIRE(std::holds_alternative<QubitState>(explicit_spec));
        CHECK(std::get<QubitState>(explicit_spec).a().real() ==
              doctest::Approx(0.6));

        cfg.b_im = 5.0;  // not normalizable within tolerance
        CHECK_THROWS_AS(initial_spec(cfg), ConfigError);
        cfg = AppConfig{};
        cfg.theta = 4.0;  // outside [0, pi]
        CHECK_THROWS_AS(initial_spec(cfg), ConfigError);
    }

    SUBCASE("control law mapping") {
        cfg.kappa = 3.0;
        cfg.h1 = "sigma_z_half";
        cfg.sign = "plus";
        cfg.perturbation = 0.01;
        ControlLawConfig law = control_config(cfg);
        CHECK(law.kappa == 3.0);
        CHECK(law.h1_choice == ControlOperator::sigma_z_half);
        CHECK(law.sign_convention == ControlSign::plus_f);
        CHECK(!law.target.fixed_hamiltonian.has_value());
        CHECK(law.target.perturbation_angle == 0.01);

        cfg.target = "fixed";
        cfg.target_R = 0.5;
        cfg.target_v = 0.25;
        law = control_config(cfg);
        REQUIRE(law.target.fixed_hamiltonian.has_value());
        CHECK(law.target.fixed_hamiltonian->R == 0.5);
        CHECK(law.target.fixed_hamiltonian->v == 0.25);

        cfg.kappa = -1.0;
        CHECK_THROWS_AS(control_config(cfg), ConfigError);
    }

    SUBCASE("sweep config carries grid, window and integrator") {
        cfg.mode = "nonlinear";
        cfg.C = 2.0;
        cfg.r_count = 8;
        cfg.v_count = 9;
        cfg.t_samples = 25;
        cfg.dt = 0.01;
        cfg.skip_failed = true;
        const SweepConfig sc = to_sweep_config(cfg);
        CHECK(sc.mode == SweepMode::nonlinear);
        CHECK(sc.C == 2.0);
        CHECK(sc.r_range.count == 8);
        CHECK(sc.v_range.count == 9);
        CHECK(sc.t_window.sample_count == 25);
        CHECK(sc.integrator.dt == 0.01);
        CHECK(sc.skip_failed_nodes);

        cfg.r_count = 0;
        CHECK_THROWS_AS(to_sweep_config(cfg), ConfigError);
    }

    SUBCASE("partition and integrator validation is wrapped") {
        cfg.n_z = 0;
        CHECK_THROWS_AS(partition(cfg), ConfigError);
        cfg = AppConfig{};
        cfg.dt = 0.0;
        CHECK_THROWS_AS(integrator_config(cfg), ConfigError);
    }
}

TEST_CASE("trajectory grid includes t = 0 and the endpoint") {
    AppConfig cfg;
    cfg.t_max = 4.0;
    cfg.t_samples = 201;
    const std::vector<double> grid = trajectory_grid(cfg);
    REQUIRE(grid.size() == 201);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == 4.0);
    CHECK(grid[1] == doctest::Approx(0.02).epsilon(1e-15));

    cfg.t_samples = 1;
    CHECK(trajectory_grid(cfg) == std::vector<double>{0.0});
    cfg.t_samples = 2;
    CHECK(trajectory_grid(cfg) == std::vector<double>{0.0, 4.0});
    cfg.t_samples = 0;
    CHECK_THROWS_AS(trajectory_grid(cfg), ConfigError);
}

TEST_CASE("csv writers produce the exact pinned layout") {
    Trajectory tr;
    tr.samples.push_back({0.0, QubitState::excited(), {0.0, 0.0, 1.0}});
    tr.samples.push_back({0.5, QubitState::ground(), {0.0, 0.0, -1.0}});
    CHECK(trajectory_csv(tr) ==
          "t,re_a,im_a,re_b,im_b,px,py,pz\n"
          "0,1,0,0,0,0,0,1\n"
          "0.5,0,0,1,0,0,0,-1\n");

    ControlledRun run;
    run.trajectory = tr;
    run.f_series = {{0.0, 0.25}, {0.5, -0.5}};
    run.v_series = {{0.0, 0.0}, {0.5, 1.0}};
    CHECK(controlled_csv(run) ==
          "t,re_a,im_a,re_b,im_b,px,py,pz,f,V\n"
          "0,1,0,0,0,0,0,1,0.25,0\n"
          "0.5,0,0,1,0,0,0,-1,-0.5,1\n");
    run.f_series.pop_back();
    CHECK_THROWS_AS(controlled_csv(run), std::logic_error);

    PointCloud cloud;
    cloud.points.push_back({1.0, 2.0, 0.25, 0.0, 0.5, -0.5});
    CHECK(cloud_csv(cloud) == "R,v,t,px,py,pz\n1,2,0.25,0,0.5,-0.5\n");
}

TEST_CASE("coverage json carries the documented keys") {
    AppConfig cfg;
    cfg.mode = "nonlinear";
    cfg.C = 2.0;
    CoverageReport rep;
    rep.occupied_cells = 161;
    rep.total_cells = 288;
    rep.coverage = 161.0 / 288.0;
    const auto j = nlohmann::json::parse(coverage_json(cfg, rep));
    CHECK(j.at("coverage").get<double>() == doctest::Approx(161.0 / 288.0));
    CHECK(j.at("occupied_cells").get<int>() == 161);
    CHECK(j.at("total_cells").get<int>() == 288);
    CHECK(j.at("partition").at("n_z").get<int>() == 16);
    CHECK(j.at("partition").at("n_phi").get<int>() == 18);
    CHECK(j.at("mode").get<std::string>() == "nonlinear");
    CHECK(j.at("params").at("C").get<double>() == 2.0);
    CHECK(j.at("grid").at("R").at("count").get<int>() == 71);
    CHECK(j.at("t_window").at("t_max").get<double>() == 4.0);
    CHECK(j.at("initial").at("theta").get<double>() == 0.0);
    CHECK(j.at("integrator").at("dt").get<double>() == 1e-3);

    cfg.mode = "controlled";
    cfg.kappa = 27.0;
    const auto jc = nlohmann::json::parse(coverage_json(cfg, rep));
    CHECK(jc.at("params").at("kappa").get<double>() == 27.0);
    CHECK(jc.at("params").count("C") == 0);
}

TEST_CASE("compare table aligns and the json twin matches") {
    std::vector<CoverageRow> rows;
    rows.push_back({"a.json", 0.5, 0.0});
    rows.push_back({"much_longer_label.json", 0.25, -0.25});
    const std::string table = compare_table(rows);
    const auto lines = split_lines(table);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].find("label") != std::string::npos);
    CHECK(lines[0].find("coverage") != std::string::npos);
    CHECK(lines[0].find("delta_vs_first") != std::string::npos);
    CHECK(lines[1].find("a.json") == 0);
    CHECK(lines[1].find("0.500000") != std::string::npos);
    CHECK(lines[1].find("+0.000000") != std::string::npos);
    CHECK(lines[2].find("much_longer_label.json") == 0);
    CHECK(lines[2].find("-0.250000") != std::string::npos);
    // data rows line up: the coverage columns end at the same offset
    CHECK(lines[1].size() == lines[2].size());

    const auto j = nlohmann::json::parse(compare_json(rows));
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[1].at("label").get<std::string>() ==
          "much_longer_label.json");
    CHECK(j.at("rows")[1].at("delta_vs_first").get<double>() ==
          doctest::Approx(-0.25));
}

TEST_CASE("manifest json records command, version, outputs and config") {
    AppConfig cfg;
    cfg.dir = "out";
    const auto j = nlohmann::json::parse(
        manifest_json(cfg, "blochreach sweep --preset fig1",
                      {"out/cloud.csv", "out/coverage.json"}, 8, 1.25));
    CHECK(j.at("command").get<std::string>() ==
          "blochreach sweep --preset fig1");
    CHECK(j.at("version").get<std::string>() == version_string);
    CHECK(j.at("duration_seconds").get<double>() == 1.25);
    CHECK(j.at("workers").get<int>() == 8);
    CHECK(j.at("outputs").size() == 2);
    CHECK(j.at("config").at("system").at("mode").get<std::string>() ==
          "linear");
    CHECK(j.at("config").at("sweep").at("r_count").get<int>() == 71);
    CHECK(j.at("config").at("control").at("kappa").get<double>() == 0.0);
    CHECK(j.at("config").at("integrator").at("renormalize").get<bool>());
    CHECK(j.at("config").at("output").at("dir").get<std::string>() == "out");
}

TEST_CASE("svg projections show only the camera-facing hemisphere") {
    PointCloud cloud;
    cloud.points.push_back({1.0, 1.0, 0.1, 0.5, 0.5, 0.0});    // front
    cloud.points.push_back({1.0, 1.0, 0.2, -1.0, -0.5, 0.0});  // back

    const std::string plus = cloud_svg(cloud, true);
    CHECK(plus.find("<svg") == 0);
    CHECK(plus.find("view from +y") != std::string::npos);
    // wireframe outline + exactly one visible point
    CHECK(count_occurrences(plus, "<circle") == 2);
    CHECK(plus.find("cx=\"400.0\"") != std::string::npos);  // 280 + 240*0.5

    const std::string minus = cloud_svg(cloud, false);
    CHECK(minus.find("view from -y") != std::string::npos);
    CHECK(count_occurrences(minus, "<circle") == 2);
    // px = -1 seen from -y lands on the +screen side: 280 + 240
    CHECK(minus.find("cx=\"520.0\"") != std::string::npos);
}

TEST_CASE("atomic writes land complete and clean up their temp file") {
    const fsys::path dir = scratch_dir("atomic");
    const fsys::path target = dir / "x.txt";
    write_file_atomic(target.string(), "hello\n");
    CHECK(read_file(target) == "hello\n");
    CHECK(!fsys::exists(target.string() + ".tmp"));
    write_file_atomic(target.string(), "replaced\n");
    CHECK(read_file(target) == "replaced\n");
    CHECK_THROWS_AS(write_file_atomic("/nonexistent_dir_zz/x.txt", "y"),
                    ConfigError);
}

TEST_CASE("binary: half Rabi flop trajectory and byte-identical rerun") {
    const fsys::path dir = scratch_dir("traj_flop");
    const std::string args =
        "trajectory --mode linear --R 0 --v 3.141592653589793 --t-max 1 "
        "--t-samples 3 --dir \"" + (dir / "a").string() + "\"";
    const RunResult r = run_bin(args, dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("trajectory.csv") != std::string::npos);

    const std::string csv = read_file(dir / "a" / "trajectory.csv");
    const auto lines = split_lines(csv);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "t,re_a,im_a,re_b,im_b,px,py,pz");
    const auto last = csv_fields(lines[3]);
    REQUIRE(last.size() == 8);
    CHECK(last[0] == 1.0);
    CHECK(last[7] == doctest::Approx(-1.0).epsilon(1e-8));

    // re-running the same config must reproduce the file byte for byte
    const std::string args2 =
        "trajectory --mode linear --R 0 --v 3.141592653589793 --t-max 1 "
        "--t-samples 3 --dir \"" + (dir / "b").string() + "\"";
    CHECK(run_bin(args2, dir).code == 0);
    const bool identical = read_file(dir / "b" / "trajectory.csv") == csv;
    CHECK(identical);

    const auto manifest = nlohmann::json::parse(
        read_file(dir / "a" / "manifest.json"));
    CHECK(manifest.at("config").at("system").at("R").get<double>() == 0.0);
}

TEST_CASE("binary: controlled trajectory with coincident target keeps V at 0") {
    const fsys::path dir = scratch_dir("traj_controlled");
    const RunResult r = run_bin(
        "trajectory --mode controlled --R 0.25 --v 0.25 --kappa 9 "
        "--t-max 2 --t-samples 5 --dir \"" + dir.string() + "\"",
        dir);
    CHECK(r.code == 0);
    const auto lines = split_lines(read_file(dir / "trajectory.csv"));
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "t,re_a,im_a,re_b,im_b,px,py,pz,f,V");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto row = csv_fields(lines[i]);
        REQUIRE(row.size() == 10);
        CHECK(std::abs(row[9]) <= 1e-10);
    }
}

TEST_CASE("binary: config and flag errors exit with code 2") {
    const fsys::path dir = scratch_dir("exit2");

    RunResult r = run_bin("trajectory --bogus 1", dir);
    CHECK(r.code == 2);

    write_file((dir / "bad.cfg").string(), "[system]\nbogus = 1\n");
    r = run_bin("sweep --config \"" + (dir / "bad.cfg").string() + "\"", dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("bogus") != std::string::npos);

    r = run_bin("sweep --preset fig9", dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("fig9") != std::string::npos);

    r = run_bin("trajectory --theta 9", dir);
    CHECK(r.code == 2);

    r = run_bin("sweep --workers 0 --r-count 2 --v-count 2 --t-samples 2",
                dir);
    CHECK(r.code == 2);

    r = run_bin("compare /no/such/coverage.json", dir);
    CHECK(r.code == 2);

    r = run_bin("", dir);  // a subcommand is required
    CHECK(r.code == 2);
}

TEST_CASE("binary: help exits 0 and documents the subcommands") {
    const fsys::path dir = scratch_dir("help");
    RunResult r = run_bin("--help", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("trajectory") != std::string::npos);
    CHECK(r.out.find("sweep") != std::string::npos);
    CHECK(r.out.find("compare") != std::string::npos);
    CHECK(r.out.find("defaults") != std::string::npos);

    r = run_bin("sweep --help", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("--workers") != std::string::npos);
}

TEST_CASE("binary: integrator failure exits with code 3") {
    const fsys::path dir = scratch_dir("exit3");
    const RunResult r = run_bin(
        "trajectory --mode nonlinear --R 0 --v 0.1 --C 100 --dt 0.01 "
        "--no-renormalize --norm-tolerance 1e-9 --t-max 1 --t-samples 3 "
        "--dir \"" + dir.string() + "\"",
        dir);
    CHECK(r.code == 3);
    CHECK(r.err.find("numerical failure") != std::string::npos);
}

TEST_CASE("binary: sweep output is byte-identical across worker counts") {
    const fsys::path dir = scratch_dir("workers");
    const std::string common =
        "sweep --mode nonlinear --C 2 --r-count 8 --v-count 8 "
        "--t-samples 25 --dt 0.01 --dir ";

    REQUIRE(run_bin(common + "\"" + (dir / "w1").string() + "\" --workers 1",
                    dir).code == 0);
    REQUIRE(run_bin(common + "\"" + (dir / "w2").string() + "\" --workers 2",
                    dir).code == 0);
    // worker count via the environment instead of the flag
    REQUIRE(run_bin(common + "\"" + (dir / "we").string() + "\"", dir,
                    "BLOCHREACH_WORKERS=3 ").code == 0);

    const std::string c1 = read_file(dir / "w1" / "cloud.csv");
    REQUIRE(!c1.empty());
    const bool same12 = c1 == read_file(dir / "w2" / "cloud.csv");
    const bool same1e = c1 == read_file(dir / "we" / "cloud.csv");
    CHECK(same12);
    CHECK(same1e);

    const auto m1 = nlohmann::json::parse(read_file(dir / "w1" / "manifest.json"));
    CHECK(m1.at("workers").get<int>() == 1);
    const auto me = nlohmann::json::parse(read_file(dir / "we" / "manifest.json"));
    CHECK(me.at("workers").get<int>() == 3);

    const RunResult bad_env = run_bin(
        common + "\"" + (dir / "wx").string() + "\"", dir,
        "BLOCHREACH_WORKERS=zero ");
    CHECK(bad_env.code == 2);
}

TEST_CASE("binary: sweep emits parseable summaries and optional svg") {
    const fsys::path dir = scratch_dir("sweep_files");
    const RunResult r = run_bin(
        "sweep --mode linear --r-count 3 --v-count 3 --t-samples 5 --svg "
        "--dir \"" + dir.string() + "\"",
        dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("coverage ") != std::string::npos);

    const auto cov = nlohmann::json::parse(read_file(dir / "coverage.json"));
    CHECK(cov.at("total_cells").get<int>() == 288);
    CHECK(cov.at("mode").get<std::string>() == "linear");
    const auto lines = split_lines(read_file(dir / "cloud.csv"));
    CHECK(lines.size() == 1 + 3 * 3 * 5);
    CHECK(lines[0] == "R,v,t,px,py,pz");

    const std::string svg_plus = read_file(dir / "cloud_from_plus_y.svg");
    const std::string svg_minus = read_file(dir / "cloud_from_minus_y.svg");
    CHECK(svg_plus.substr(0, 4) == "<svg");
    CHECK(svg_minus.substr(0, 4) == "<svg");

    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(manifest.at("outputs").size() == 4);  // csv, json, two svgs
}

TEST_CASE("binary: compare pipeline tabulates coverage files") {
    const fsys::path dir = scratch_dir("compare");
    const std::string c0 = (dir / "c0").string();
    const std::string c2 = (dir / "c2").string();
    const std::string common =
        "sweep --r-count 5 --v-count 5 --t-samples 9 --dt 0.02 ";
    REQUIRE(run_bin(common + "--mode linear --dir \"" + c0 + "\"", dir).code ==
            0);
    REQUIRE(run_bin(common + "--mode nonlinear --C 2 --dir \"" + c2 + "\"",
                    dir).code == 0);

    const RunResult r = run_bin(
        "compare \"" + c0 + "/coverage.json\" \"" + c2 +
        "/coverage.json\" --dir \"" + dir.string() + "\"",
        dir);
    CHECK(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() >= 3);
    CHECK(lines[0].find("delta_vs_first") != std::string::npos);

    const auto j = nlohmann::json::parse(read_file(dir / "compare.json"));
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("delta_vs_first").get<double>() == 0.0);
    const double cov0 = j.at("rows")[0].at("coverage").get<double>();
    const double cov2 = j.at("rows")[1].at("coverage").get<double>();
    CHECK(j.at("rows")[1].at("delta_vs_first").get<double>() ==
          doctest::Approx(cov2 - cov0));

    // identical inputs give delta 0
    const RunResult r2 = run_bin(
        "compare \"" + c0 + "/coverage.json\" \"" + c0 +
        "/coverage.json\" --dir \"" + (dir / "same").string() + "\"",
        dir);
    CHECK(r2.code == 0);
    const auto js = nlohmann::json::parse(
        read_file(dir / "same" / "compare.json"));
    CHECK(js.at("rows")[1].at("delta_vs_first").get<double>() == 0.0);
}

TEST_CASE("binary: defaults emits a parseable config equal to the built-ins") {
    const fsys::path dir = scratch_dir("defaults");
    const RunResult printed = run_bin("defaults", dir);
    CHECK(printed.code == 0);
    CHECK(printed.out.find("[system]") != std::string::npos);

    const fsys::path file = dir / "defaults.cfg";
    REQUIRE(run_bin("defaults --out \"" + file.string() + "\"", dir).code == 0);
    CHECK(read_file(file) == printed.out);

    AppConfig parsed;
    apply_config_file(parsed, file.string());
    const AppConfig fresh;
    CHECK(parsed.mode == fresh.mode);
    CHECK(parsed.R == fresh.R);
    CHECK(parsed.r_count == fresh.r_count);
    CHECK(parsed.t_samples == fresh.t_samples);
    CHECK(parsed.kappa == fresh.kappa);
    CHECK(parsed.dt == fresh.dt);
    CHECK(parsed.renormalize == fresh.renormalize);
    CHECK(parsed.dir == fresh.dir);
}
