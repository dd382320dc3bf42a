#pragma once

#include <string>
#include <vector>

#include "blochreach/lyapunov.hpp"
#include "blochreach/reach.hpp"
#include "config.hpp"

// File emitters. All CSV numbers are printed with 17 significant digits via
// to_chars (locale-independent, round-trippable), separators are ',' and LF.

namespace blochreach::cli {

inline constexpr const char* version_string = "0.1.0";

std::string format_double(double x);

// trajectory.csv: t,re_a,im_a,re_b,im_b,px,py,pz
std::string trajectory_csv(const Trajectory& tr);
// same plus f,V columns
std::string controlled_csv(const ControlledRun& run);
// cloud.csv: R,v,t,px,py,pz
std::string cloud_csv(const PointCloud& cloud);

// coverage.json content (keys: coverage, occupied_cells, total_cells,
// partition, mode, params, grid, t_window, initial, integrator).
std::string coverage_json(const AppConfig& cfg, const CoverageReport& report);

// compare table (label, coverage, delta vs first) and its JSON twin.
std::string compare_table(const std::vector<CoverageRow>& rows);
std::string compare_json(const std::vector<CoverageRow>& rows);

// manifest.json content for a finished command.
std::string manifest_json(const AppConfig& cfg, const std::string& command,
                          const std::vector<std::string>& outputs, int workers,
                          double duration_seconds);

// Orthographic scatter of the cloud as seen from +y or -y (the hemisphere
// facing the viewer), with a wireframe sphere.
std::string cloud_svg(const PointCloud& cloud, bool from_plus_y);

// Write with a temp-file + rename so readers never see partial content.
void write_file_atomic(const std::string& path, const std::string& content);
void write_file(const std::string& path, const std::string& content);

}  // namespace blochreach::cli
