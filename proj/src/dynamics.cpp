#include "blochreach/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace blochreach {

void IntegratorConfig::validate() const {
    if (!(std::isfinite(dt) && dt > 0.0)) {
        throw std::invalid_argument("IntegratorConfig: dt must be positive, got " +
                                    std::to_string(dt));
    }
    if (!(std::isfinite(norm_drift_tolerance) && norm_drift_tolerance > 0.0)) {
        throw std::invalid_argument(
            "IntegratorConfig: norm_drift_tolerance must be positive, got " +
            std::to_string(norm_drift_tolerance));
    }
}

QubitState propagate_linear(const HamiltonianParams& p, const QubitState& s0,
                            double t) {
    const double om = std::hypot(p.R, p.v);  // level splitting = 2w
    if (om < 1e-300) {
        return s0;
    }
    const double w = 0.5 * om * t;
    const Complex c{std::cos(w), 0.0};
    const Complex ms{0.0, -std::sin(w) / om};
    const Complex a = s0.a();
    const Complex b = s0.b();
    return QubitState{c * a + ms * (p.R * a + p.v * b),
                      c * b + ms * (p.v * a - p.R * b)};
}

Spinor nonlinear_rhs(const HamiltonianParams& p, const Spinor& s) {
    const double hz = 0.5 * (p.R - p.C * sigma_z_expectation(s));
    const double hx = 0.5 * p.v;
    // -i H s with H = hz sigma_z + hx sigma_x
    const Complex mi{0.0, -1.0};
    return {mi * (hz * s.a + hx * s.b), mi * (hx * s.a - hz * s.b)};
}

namespace {

std::string format_failure(const char* what, double value,
                           const HamiltonianParams& p, double t) {
    std::ostringstream os;
    os << what << " " << value << " at t = " << t << " (R = " << p.R
       << ", v = " << p.v << ", C = " << p.C << ")";
    return os.str();
}

// Fixed-step RK4 between recording times. Tracks the worst pre-renormalization
// norm deviation seen; aborts on non-finite amplitudes or, when renormalization
// is off, on drift beyond the configured tolerance.
class Stepper {
public:
    Stepper(const HamiltonianParams& p, const QubitState& s0,
            const IntegratorConfig& cfg)
        : p_(p), cfg_(cfg), s_(s0.spinor()) {
        cfg.validate();
    }

    void advance_to(double t_target) {
        while (true) {
            const double remaining = t_target - t_;
            if (remaining <= cfg_.dt * 1e-9) {
                t_ = t_target;
                return;
            }
            const double h = std::min(cfg_.dt, remaining);
            s_ = rk4_step(s_, h, [this](const Spinor& x) { return nonlinear_rhs(p_, x); });
            t_ += h;
            const double n = s_.norm();
            if (!std::isfinite(n) || n <= 0.0) {
                throw IntegratorError(
                    format_failure("non-finite amplitudes, norm", n, p_, t_), p_, t_);
            }
            const double drift = std::abs(n - 1.0);
            max_drift_ = std::max(max_drift_, drift);
            if (cfg_.renormalize_every_step) {
                s_ *= 1.0 / n;
            } else if (drift > cfg_.norm_drift_tolerance) {
                throw IntegratorError(
                    format_failure("norm drift", drift, p_, t_), p_, t_);
            }
        }
    }

    QubitState snapshot() const { return QubitState{(1.0 / s_.norm()) * s_}; }
    double max_drift() const { return max_drift_; }

private:
    HamiltonianParams p_;
    IntegratorConfig cfg_;
    Spinor s_;
    double t_ = 0.0;
    double max_drift_ = 0.0;
};

void check_grid(std::span<const double> t_grid) {
    double prev = 0.0;
    for (double t : t_grid) {
        if (!(std::isfinite(t) && t >= prev)) {
            throw std::invalid_argument(
                "sample_trajectory: t_grid must be nonnegative and nondecreasing");
        }
        prev = t;
    }
}

}  // namespace

QubitState propagate_nonlinear(const HamiltonianParams& p, const QubitState& s0,
                               double t_final, const IntegratorConfig& cfg) {
    if (!(std::isfinite(t_final) && t_final >= 0.0)) {
        throw std::invalid_argument(
            "propagate_nonlinear: t_final must be nonnegative, got " +
            std::to_string(t_final));
    }
    Stepper st(p, s0, cfg);
    st.advance_to(t_final);
    return st.snapshot();
}

Trajectory sample_trajectory(const HamiltonianParams& p, const QubitState& s0,
                             std::span<const double> t_grid,
                             const IntegratorConfig& cfg) {
    check_grid(t_grid);
    Trajectory out;
    out.samples.reserve(t_grid.size());
    Stepper st(p, s0, cfg);
    for (double t : t_grid) {
        st.advance_to(t);
        const QubitState s = st.snapshot();
        out.samples.push_back({t, s, bloch_from_state(s)});
    }
    out.max_norm_drift = st.max_drift();
    return out;
}

}  // namespace blochreach
