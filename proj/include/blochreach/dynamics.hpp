#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blochreach/qcore.hpp"

// Time evolution: a closed-form propagator for the linear model and a fixed
// step RK4 integrator for the mean-field model i d|psi>/dt = H_nl |psi> with
// H_nl = (R/2) sigma_z - (C/2) <sigma_z> sigma_z + (v/2) sigma_x.

namespace blochreach {

struct IntegratorConfig {
    double dt = 1e-3;
    bool renormalize_every_step = true;
    // Without renormalization, |‖psi‖ - 1| beyond this aborts the run.
    double norm_drift_tolerance = 1e-6;

    void validate() const;  // throws std::invalid_argument
};

// Raised when a run exceeds the drift tolerance or produces non-finite
// amplitudes; carries the parameters and time of the failing step.
class IntegratorError : public std::runtime_error {
public:
    IntegratorError(const std::string& what, const HamiltonianParams& params,
                    double t)
        : std::runtime_error(what), params_(params), t_(t) {}

    const HamiltonianParams& params() const { return params_; }
    double time() const { return t_; }

private:
    HamiltonianParams params_;
    double t_;
};

struct TrajectorySample {
    double t = 0.0;
    QubitState state;
    BlochVector bloch;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    // Worst |‖psi‖ - 1| seen at any internal step, measured before
    // renormalization; the norm-conservation diagnostic for RK4.
    double max_norm_drift = 0.0;
};

// exp(-i H t) s0 via the su(2) closed form
//   U = cos(wt) I - i sin(wt) (R sigma_z + v sigma_x)/sqrt(R^2+v^2),
// w = sqrt(R^2+v^2)/2; identity when the splitting vanishes. Ignores p.C.
QubitState propagate_linear(const HamiltonianParams& p, const QubitState& s0,
                            double t);

// -i H_nl(s) s with <sigma_z> taken from s as-is (no normalization), so RK4
// stages see the mean field of the raw stage vector.
Spinor nonlinear_rhs(const HamiltonianParams& p, const Spinor& s);

// One classical RK4 step of an autonomous system ds/dt = rhs(s).
template <typename State, typename Rhs>
State rk4_step(const State& s, double h, Rhs&& rhs) {
    const State k1 = rhs(s);
    const State k2 = rhs(s + 0.5 * h * k1);
    const State k3 = rhs(s + 0.5 * h * k2);
    const State k4 = rhs(s + h * k3);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Integrate from t = 0 to t_final (>= 0) in fixed steps of cfg.dt, shortening
// the last step to land exactly on t_final.
QubitState propagate_nonlinear(const HamiltonianParams& p, const QubitState& s0,
                               double t_final, const IntegratorConfig& cfg);

// One continuous integration recorded at the given times; t_grid must be
// nonnegative and nondecreasing. Each sample stores the (normalized) state
// and its Bloch vector.
Trajectory sample_trajectory(const HamiltonianParams& p, const QubitState& s0,
                             std::span<const double> t_grid,
                             const IntegratorConfig& cfg);

}  // namespace blochreach
