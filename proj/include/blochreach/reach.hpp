#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "blochreach/dynamics.hpp"
#include "blochreach/lyapunov.hpp"
#include "blochreach/qcore.hpp"

// Reachable-set engine: sweep an (R, v) grid, accumulate Bloch samples from
// one continuous evolution per grid node, and measure how much of the sphere
// the accumulated cloud touches on an equal-area partition.

namespace blochreach {

// Inclusive uniform grid; count = 1 degenerates to {min}.
struct RangeSpec {
    double min = 0.0;
    double max = 0.0;
    int count = 1;

    void validate() const;
    std::vector<double> values() const;
};

// Sample times t_k = (k+1) t_max / sample_count, k = 0..sample_count-1:
// uniform over (0, t_max], endpoint included, t = 0 excluded (the initial
// state is the same for every node and would only add its own cell).
struct TimeWindow {
    double t_max = 4.0;
    int sample_count = 201;

    void validate() const;
    std::vector<double> sample_times() const;
};

enum class SweepMode { linear, nonlinear, controlled };

// Initial state: either F(theta, phi)|e> via transform angles or an explicit
// state.
using InitialSpec = std::variant<TransformParams, QubitState>;

QubitState initial_state_of(const InitialSpec& init);

struct SweepConfig {
    SweepMode mode = SweepMode::linear;
    double C = 0.0;              // nonlinear mode only
    ControlLawConfig control;    // controlled mode only
    RangeSpec r_range;
    RangeSpec v_range;
    TimeWindow t_window;
    InitialSpec initial = TransformParams{0.0, 0.0};
    IntegratorConfig integrator;
    // On integrator failure: false = abort the sweep, true = drop the node
    // and record it in PointCloud::skipped.
    bool skip_failed_nodes = false;

    void validate() const;
};

struct CloudPoint {
    double R = 0.0;
    double v = 0.0;
    double t = 0.0;
    double px = 0.0;
    double py = 0.0;
    double pz = 0.0;
};

struct NodeFailure {
    double R = 0.0;
    double v = 0.0;
    std::string message;
};

// Points ordered lexicographically by (R-index, v-index, t-index) regardless
// of how many workers produced them.
struct PointCloud {
    std::vector<CloudPoint> points;
    SweepConfig provenance;
    std::vector<NodeFailure> skipped;
};

class SweepError : public std::runtime_error {
public:
    SweepError(const std::string& what, double R, double v)
        : std::runtime_error(what), R_(R), v_(v) {}

    double R() const { return R_; }
    double v() const { return v_; }

private:
    double R_;
    double v_;
};

// Run one trajectory per (R, v) node and collect Bloch samples. workers >= 1;
// output is byte-identical for any worker count. Throws SweepError naming the
// failing node unless cfg.skip_failed_nodes is set.
PointCloud run_sweep(const SweepConfig& cfg, int workers = 1);

// n_z equal-width slices in p_z times n_phi azimuth slices: equal-area cells,
// since the sphere's area element is uniform in (z, azimuth).
struct SpherePartition {
    int n_z = 16;
    int n_phi = 18;

    void validate() const;
    int total_cells() const { return n_z * n_phi; }
};

// z_slice * n_phi + phi_slice with z_slice = floor((p_z+1)/2 * n_z) and
// phi_slice = floor(azimuth/2pi * n_phi), azimuth = atan2(p_y, p_x) shifted
// into [0, 2pi); boundary values clamp into range (p_z = 1 lands in the top
// slice). Requires |p| = 1 within 1e-6.
int cell_index(const BlochVector& p, const SpherePartition& part);

struct CoverageReport {
    int occupied_cells = 0;
    int total_cells = 0;
    double coverage = 0.0;  // occupied / total
    std::map<int, std::int64_t> per_cell_counts;
};

CoverageReport coverage(const PointCloud& cloud, const SpherePartition& part);

struct LabeledCloud {
    std::string label;
    const PointCloud* cloud = nullptr;
};

struct CoverageRow {
    std::string label;
    double coverage = 0.0;
    double delta_vs_first = 0.0;
};

// Coverage per cloud in input order, with each row's delta against the first.
// All clouds must be nonempty.
std::vector<CoverageRow> compare_coverage(const std::vector<LabeledCloud>& clouds,
                                          const SpherePartition& part);

}  // namespace blochreach
