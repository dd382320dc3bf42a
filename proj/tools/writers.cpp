#include "writers.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace blochreach::cli {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

void append_row(std::string& out, std::initializer_list<double> fields) {
    bool first = true;
    for (double f : fields) {
        if (!first) out += ',';
        out += format_double(f);
        first = false;
    }
    out += '\n';
}

}  // namespace

std::string trajectory_csv(const Trajectory& tr) {
    std::string out = "t,re_a,im_a,re_b,im_b,px,py,pz\n";
    for (const auto& s : tr.samples) {
        append_row(out, {s.t, s.state.a().real(), s.state.a().imag(),
                         s.state.b().real(), s.state.b().imag(), s.bloch.x,
                         s.bloch.y, s.bloch.z});
    }
    return out;
}

std::string controlled_csv(const ControlledRun& run) {
    const auto& samples = run.trajectory.samples;
    if (run.f_series.size() != samples.size() ||
        run.v_series.size() != samples.size()) {
        throw std::logic_error("controlled run series lengths disagree");
    }
    std::string out = "t,re_a,im_a,re_b,im_b,px,py,pz,f,V\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        append_row(out, {s.t, s.state.a().real(), s.state.a().imag(),
                         s.state.b().real(), s.state.b().imag(), s.bloch.x,
                         s.bloch.y, s.bloch.z, run.f_series[i].value,
                         run.v_series[i].value});
    }
    return out;
}

std::string cloud_csv(const PointCloud& cloud) {
    std::string out = "R,v,t,px,py,pz\n";
    out.reserve(out.size() + cloud.points.size() * 64);
    for (const auto& p : cloud.points) {
        append_row(out, {p.R, p.v, p.t, p.px, p.py, p.pz});
    }
    return out;
}

namespace {

ordered_json initial_json(const AppConfig& cfg) {
    if (cfg.a_re && cfg.a_im && cfg.b_re && cfg.b_im) {
        return {{"a_re", *cfg.a_re},
                {"a_im", *cfg.a_im},
                {"b_re", *cfg.b_re},
                {"b_im", *cfg.b_im}};
    }
    return {{"theta", cfg.theta}, {"phi", cfg.phi}};
}

ordered_json integrator_json(const AppConfig& cfg) {
    return {{"dt", cfg.dt},
            {"renormalize", cfg.renormalize},
            {"norm_tolerance", cfg.norm_tolerance},
            {"skip_failed", cfg.skip_failed}};
}

ordered_json mode_params_json(const AppConfig& cfg) {
    ordered_json params = ordered_json::object();
    if (cfg.mode == "nonlinear") {
        params["C"] = cfg.C;
    } else if (cfg.mode == "controlled") {
        params["kappa"] = cfg.kappa;
        params["h1"] = cfg.h1;
        params["sign"] = cfg.sign;
        params["target"] = cfg.target;
        if (cfg.target == "fixed") {
            params["target_R"] = cfg.target_R;
            params["target_v"] = cfg.target_v;
        }
        params["perturbation"] = cfg.perturbation;
    }
    return params;
}

}  // namespace

std::string coverage_json(const AppConfig& cfg, const CoverageReport& report) {
    ordered_json j;
    j["coverage"] = report.coverage;
    j["occupied_cells"] = report.occupied_cells;
    j["total_cells"] = report.total_cells;
    j["partition"] = {{"n_z", cfg.n_z}, {"n_phi", cfg.n_phi}};
    j["mode"] = cfg.mode;
    j["params"] = mode_params_json(cfg);
    j["grid"] = {
        {"R", {{"min", cfg.r_min}, {"max", cfg.r_max}, {"count", cfg.r_count}}},
        {"v", {{"min", cfg.v_min}, {"max", cfg.v_max}, {"count", cfg.v_count}}}};
    j["t_window"] = {{"t_max", cfg.t_max}, {"samples", cfg.t_samples}};
    j["initial"] = initial_json(cfg);
    j["integrator"] = integrator_json(cfg);
    return j.dump(2) + "\n";
}

std::string compare_table(const std::vector<CoverageRow>& rows) {
    std::size_t w = 5;  // "label"
    for (const auto& r : rows) w = std::max(w, r.label.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(w)) << "label" << "  "
       << std::right << std::setw(10) << "coverage" << "  " << std::setw(14)
       << "delta_vs_first" << '\n';
    os << std::fixed << std::setprecision(6);
    for (const auto& r : rows) {
        os << std::left << std::setw(static_cast<int>(w)) << r.label << "  "
           << std::right << std::setw(10) << r.coverage << "  " << std::showpos
           << std::setw(14) << r.delta_vs_first << std::noshowpos << '\n';
    }
    return os.str();
}

std::string compare_json(const std::vector<CoverageRow>& rows) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
        arr.push_back({{"label", r.label},
                       {"coverage", r.coverage},
                       {"delta_vs_first", r.delta_vs_first}});
    }
    ordered_json j;
    j["rows"] = arr;
    return j.dump(2) + "\n";
}

std::string manifest_json(const AppConfig& cfg, const std::string& command,
                          const std::vector<std::string>& outputs, int workers,
                          double duration_seconds) {
    ordered_json config;
    {
        ordered_json sys;
        sys["mode"] = cfg.mode;
        sys["R"] = cfg.R;
        sys["v"] = cfg.v;
        sys["C"] = cfg.C;
        sys["theta"] = cfg.theta;
        sys["phi"] = cfg.phi;
        if (cfg.a_re) sys["a_re"] = *cfg.a_re;
        if (cfg.a_im) sys["a_im"] = *cfg.a_im;
        if (cfg.b_re) sys["b_re"] = *cfg.b_re;
        if (cfg.b_im) sys["b_im"] = *cfg.b_im;
        config["system"] = sys;
        config["sweep"] = {{"r_min", cfg.r_min},   {"r_max", cfg.r_max},
                           {"r_count", cfg.r_count}, {"v_min", cfg.v_min},
                           {"v_max", cfg.v_max},   {"v_count", cfg.v_count},
                           {"t_max", cfg.t_max},   {"t_samples", cfg.t_samples},
                           {"n_z", cfg.n_z},       {"n_phi", cfg.n_phi}};
        config["control"] = {{"kappa", cfg.kappa},
                             {"h1", cfg.h1},
                             {"sign", cfg.sign},
                             {"target", cfg.target},
                             {"target_R", cfg.target_R},
                             {"target_v", cfg.target_v},
                             {"perturbation", cfg.perturbation}};
        config["integrator"] = integrator_json(cfg);
        config["output"] = {{"dir", cfg.dir}, {"svg", cfg.svg}};
    }
    ordered_json j;
    j["command"] = command;
    j["version"] = version_string;
    j["duration_seconds"] = duration_seconds;
    j["workers"] = workers;
    j["outputs"] = outputs;
    j["config"] = config;
    return j.dump(2) + "\n";
}

std::string cloud_svg(const PointCloud& cloud, bool from_plus_y) {
    constexpr double cx = 280.0, cy = 280.0, rad = 240.0;
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" "
         "height=\"560\" viewBox=\"0 0 560 560\">\n";
    s += "<rect width=\"560\" height=\"560\" fill=\"white\"/>\n";
    // Wireframe: outline, and the p_x = 0 / p_z = 0 great circles, which both
    // project to diameters when looking along the y axis.
    s += "<circle cx=\"280\" cy=\"280\" r=\"240\" fill=\"none\" "
         "stroke=\"#555\" stroke-width=\"1.5\"/>\n";
    s += "<line x1=\"40\" y1=\"280\" x2=\"520\" y2=\"280\" stroke=\"#bbb\" "
         "stroke-width=\"1\"/>\n";
    s += "<line x1=\"280\" y1=\"40\" x2=\"280\" y2=\"520\" stroke=\"#bbb\" "
         "stroke-width=\"1\"/>\n";
    const char* right = from_plus_y ? "+x" : "-x";
    const char* left = from_plus_y ? "-x" : "+x";
    const char* title = from_plus_y ? "view from +y" : "view from -y";
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "<g font-family=\"sans-serif\" font-size=\"14\" "
                  "fill=\"#333\">"
                  "<text x=\"16\" y=\"24\">%s</text>"
                  "<text x=\"524\" y=\"284\">%s</text>"
                  "<text x=\"18\" y=\"284\">%s</text>"
                  "<text x=\"272\" y=\"32\">+z</text>"
                  "<text x=\"272\" y=\"536\">-z</text></g>\n",
                  title, right, left);
    s += buf;
    // Camera-facing hemisphere only; thin large clouds deterministically so
    // the file stays viewable.
    const std::size_t n = cloud.points.size();
    const std::size_t stride = n > 40000 ? (n + 39999) / 40000 : 1;
    s += "<g fill=\"#1f6fb2\" fill-opacity=\"0.45\">\n";
    for (std::size_t i = 0; i < n; i += stride) {
        const auto& p = cloud.points[i];
        if (from_plus_y ? p.py < 0.0 : p.py > 0.0) continue;
        const double sx = from_plus_y ? p.px : -p.px;
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"1.5\"/>\n",
                      cx + rad * sx, cy - rad * p.pz);
        s += buf;
    }
    s += "</g>\n</svg>\n";
    return s;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError("write to '" + path + "' failed");
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    write_file(tmp, content);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw ConfigError("cannot move '" + tmp + "' into place: " +
                          ec.message());
    }
}

}  // namespace blochreach::cli
