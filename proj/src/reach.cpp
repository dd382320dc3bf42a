#include "blochreach/reach.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace blochreach {

namespace {
constexpr double two_pi = 6.28318530717958647692;
}

void RangeSpec::validate() const {
    if (!(std::isfinite(min) && std::isfinite(max) && max >= min)) {
        throw std::invalid_argument("RangeSpec: need finite max >= min, got [" +
                                    std::to_string(min) + ", " + std::to_string(max) +
                                    "]");
    }
    if (count < 1) {
        throw std::invalid_argument("RangeSpec: count must be >= 1, got " +
                                    std::to_string(count));
    }
}

std::vector<double> RangeSpec::values() const {
    validate();
    std::vector<double> out;
    out.reserve(static_cast<size_t>(count));
    if (count == 1) {
        out.push_back(min);
        return out;
    }
    for (int k = 0; k < count; ++k) {
        out.push_back(min + (max - min) * k / (count - 1));
    }
    return out;
}

void TimeWindow::validate() const {
    if (!(std::isfinite(t_max) && t_max > 0.0)) {
        throw std::invalid_argument("TimeWindow: t_max must be positive, got " +
                                    std::to_string(t_max));
    }
    if (sample_count < 1) {
        throw std::invalid_argument("TimeWindow: sample_count must be >= 1, got " +
                                    std::to_string(sample_count));
    }
}

std::vector<double> TimeWindow::sample_times() const {
    validate();
    std::vector<double> out;
    out.reserve(static_cast<size_t>(sample_count));
    for (int k = 1; k <= sample_count; ++k) {
        out.push_back(t_max * k / sample_count);
    }
    return out;
}

QubitState initial_state_of(const InitialSpec& init) {
    if (const auto* angles = std::get_if<TransformParams>(&init)) {
        // first column of F(theta, phi), i.e. F applied to |e>
        const Operator2 f = transform_f(*angles);
        return QubitState{f.e00, f.e10};
    }
    return std::get<QubitState>(init);
}

void SweepConfig::validate() const {
    r_range.validate();
    v_range.validate();
    t_window.validate();
    integrator.validate();
    if (mode == SweepMode::nonlinear && !std::isfinite(C)) {
        throw std::invalid_argument("SweepConfig: C must be finite");
    }
    if (mode == SweepMode::controlled) {
        control.validate();
    }
}

namespace {

void fill_node(const SweepConfig& cfg, const QubitState& s0,
               const std::vector<double>& ts, double R, double v,
               CloudPoint* out) {
    const auto record = [&](size_t k, const BlochVector& p) {
        out[k] = {R, v, ts[k], p.x, p.y, p.z};
    };
    switch (cfg.mode) {
        case SweepMode::linear: {
            const HamiltonianParams p{R, v, 0.0};
            for (size_t k = 0; k < ts.size(); ++k) {
                record(k, bloch_from_state(propagate_linear(p, s0, ts[k])));
            }
            break;
        }
        case SweepMode::nonlinear: {
            const HamiltonianParams p{R, v, cfg.C};
            const Trajectory tr = sample_trajectory(p, s0, ts, cfg.integrator);
            for (size_t k = 0; k < ts.size(); ++k) {
                record(k, tr.samples[k].bloch);
            }
            break;
        }
        case SweepMode::controlled: {
            const HamiltonianParams p{R, v, 0.0};
            const ControlledRun run =
                run_controlled(p, s0, cfg.control, ts, cfg.integrator);
            for (size_t k = 0; k < ts.size(); ++k) {
                record(k, run.trajectory.samples[k].bloch);
            }
            break;
        }
    }
}

}  // namespace

PointCloud run_sweep(const SweepConfig& cfg, int workers) {
    cfg.validate();
    if (workers < 1) {
        throw std::invalid_argument("run_sweep: workers must be >= 1, got " +
                                    std::to_string(workers));
    }

    const std::vector<double> rs = cfg.r_range.values();
    const std::vector<double> vs = cfg.v_range.values();
    const std::vector<double> ts = cfg.t_window.sample_times();
    const QubitState s0 = initial_state_of(cfg.initial);

    const size_t n_nodes = rs.size() * vs.size();
    const size_t per_node = ts.size();

    // Every node writes into its own pre-indexed slot, so the merged cloud is
    // ordered by (R-index, v-index, t-index) no matter how work is scheduled.
    std::vector<CloudPoint> slots(n_nodes * per_node);
    std::vector<std::uint8_t> failed(n_nodes, 0);
    std::vector<std::string> failure_text(n_nodes);

    std::atomic<size_t> next{0};
    std::atomic<bool> stop{false};

    const auto worker = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const size_t n = next.fetch_add(1, std::memory_order_relaxed);
            if (n >= n_nodes) {
                return;
            }
            const double R = rs[n / vs.size()];
            const double v = vs[n % vs.size()];
            try {
                fill_node(cfg, s0, ts, R, v, slots.data() + n * per_node);
            } catch (const std::exception& e) {
                failed[n] = 1;
                failure_text[n] = e.what();
                if (!cfg.skip_failed_nodes) {
                    stop.store(true, std::memory_order_relaxed);
                }
            }
        }
    };

    const int n_workers =
        static_cast<int>(std::min<size_t>(static_cast<size_t>(workers),
                                          std::max<size_t>(n_nodes, 1)));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    PointCloud cloud;
    cloud.provenance = cfg;
    cloud.points.reserve(n_nodes * per_node);
    for (size_t n = 0; n < n_nodes; ++n) {
        const double R = rs[n / vs.size()];
        const double v = vs[n % vs.size()];
        if (failed[n]) {
            if (!cfg.skip_failed_nodes) {
                std::ostringstream os;
                os << "sweep failed at node (R = " << R << ", v = " << v
                   << "): " << failure_text[n];
                throw SweepError(os.str(), R, v);
            }
            cloud.skipped.push_back({R, v, failure_text[n]});
            continue;
        }
        cloud.points.insert(cloud.points.end(),
                            slots.begin() + static_cast<std::ptrdiff_t>(n * per_node),
                            slots.begin() +
                                static_cast<std::ptrdiff_t>((n + 1) * per_node));
    }
    return cloud;
}

void SpherePartition::validate() const {
    if (n_z < 1 || n_phi < 1) {
        throw std::invalid_argument("SpherePartition: n_z and n_phi must be >= 1");
    }
}

int cell_index(const BlochVector& p, const SpherePartition& part) {
    part.validate();
    const double n = p.norm();
    if (!(std::isfinite(n) && std::abs(n - 1.0) <= 1e-6)) {
        throw std::invalid_argument("cell_index: |p| = " + std::to_string(n) +
                                    " is not a unit vector");
    }
    const int z = std::clamp(
        static_cast<int>(std::floor((p.z + 1.0) * 0.5 * part.n_z)), 0, part.n_z - 1);
    double az = std::atan2(p.y, p.x);
    if (az < 0.0) {
        az += two_pi;
    }
    const int f = std::clamp(static_cast<int>(std::floor(az / two_pi * part.n_phi)),
                             0, part.n_phi - 1);
    return z * part.n_phi + f;
}

CoverageReport coverage(const PointCloud& cloud, const SpherePartition& part) {
    part.validate();
    CoverageReport report;
    report.total_cells = part.total_cells();
    for (const CloudPoint& pt : cloud.points) {
        ++report.per_cell_counts[cell_index({pt.px, pt.py, pt.pz}, part)];
    }
    report.occupied_cells = static_cast<int>(report.per_cell_counts.size());
    report.coverage =
        static_cast<double>(report.occupied_cells) / report.total_cells;
    return report;
}

std::vector<CoverageRow> compare_coverage(const std::vector<LabeledCloud>& clouds,
                                          const SpherePartition& part) {
    std::vector<CoverageRow> rows;
    rows.reserve(clouds.size());
    for (const LabeledCloud& lc : clouds) {
        if (lc.cloud == nullptr || lc.cloud->points.empty()) {
            throw std::invalid_argument("compare_coverage: cloud '" + lc.label +
                                        "' is empty");
        }
        const CoverageReport rep = coverage(*lc.cloud, part);
        rows.push_back({lc.label, rep.coverage, 0.0});
    }
    for (CoverageRow& row : rows) {
        row.delta_vs_first = row.coverage - rows.front().coverage;
    }
    return rows;
}

}  // namespace blochreach
