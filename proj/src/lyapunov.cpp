#include "blochreach/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace blochreach {

void ControlLawConfig::validate() const {
    if (!(std::isfinite(kappa) && kappa >= 0.0)) {
        throw std::invalid_argument("ControlLawConfig: kappa must be >= 0, got " +
                                    std::to_string(kappa));
    }
    if (!(std::isfinite(target.perturbation_angle) &&
          target.perturbation_angle >= 0.0)) {
        throw std::invalid_argument(
            "ControlLawConfig: perturbation_angle must be >= 0, got " +
            std::to_string(target.perturbation_angle));
    }
}

double distance_v(const QubitState& psi_d, const QubitState& psi) {
    return std::clamp(1.0 - fidelity(psi_d, psi), 0.0, 1.0);
}

QubitState rotate_y(const QubitState& s, double angle) {
    const double c = std::cos(0.5 * angle);
    const double sn = std::sin(0.5 * angle);
    return QubitState{c * s.a() - sn * s.b(), sn * s.a() + c * s.b()};
}

namespace {

double law_sign(const ControlLawConfig& law) {
    return law.sign_convention == ControlSign::plus_f ? 1.0 : -1.0;
}

// sign * (coefficient of sigma_z in H1) at the raw stage vector psi.
double signed_hz_coefficient(const Spinor& psi, const ControlLawConfig& law) {
    const double base = law.h1_choice == ControlOperator::sigma_z_half
                            ? 0.5
                            : 0.5 * sigma_z_expectation(psi);
    return law_sign(law) * base;
}

// kappa * Im(<psi_d| hc sigma_z |psi> <psi|psi_d>) on raw spinors.
double law_f(const Spinor& psi_d, const Spinor& psi, double hc,
             const ControlLawConfig& law) {
    const Complex dz = std::conj(psi_d.a) * psi.a - std::conj(psi_d.b) * psi.b;
    const Complex overlap = inner(psi, psi_d);
    return law.kappa * std::imag(hc * dz * overlap);
}

}  // namespace

Operator2 control_operator(const Spinor& psi, const ControlLawConfig& law) {
    return signed_hz_coefficient(psi, law) * Operator2::pauli_z();
}

double control_f_general(const QubitState& psi_d, const QubitState& psi,
                         const ControlLawConfig& law) {
    return law_f(psi_d.spinor(), psi.spinor(),
                 signed_hz_coefficient(psi.spinor(), law), law);
}

double control_f_closed(Complex a, Complex b, Complex c, Complex d,
                        double kappa) {
    const double m = std::norm(a) - std::norm(b);
    const Complex bracket =
        (a * std::conj(c) + b * std::conj(d)) * (std::conj(a) * c - std::conj(b) * d);
    return -kappa * m * std::imag(bracket);
}

Operator2 assemble_controlled_hamiltonian(const HamiltonianParams& params,
                                          const QubitState& psi, double f,
                                          const ControlLawConfig& law) {
    const HamiltonianParams bare{params.R, params.v, 0.0};
    return linear_hamiltonian(bare) + f * control_operator(psi.spinor(), law);
}

namespace {

// Coupled (system, target) amplitudes for the shared RK4 scheme.
struct PairState {
    Spinor s;  // controlled system
    Spinor d;  // target

    PairState& operator+=(const PairState& o) { s += o.s; d += o.d; return *this; }
    friend PairState operator+(PairState l, const PairState& r) { return l += r; }
    friend PairState operator*(double k, PairState v) {
        v.s *= k;
        v.d *= k;
        return v;
    }
};

struct CoupledRhs {
    double R, v;        // system Hamiltonian
    double Rd, vd;      // target Hamiltonian
    const ControlLawConfig& law;

    PairState operator()(const PairState& y) const {
        const double hc = signed_hz_coefficient(y.s, law);
        const double f = law_f(y.d, y.s, hc, law);
        const Complex mi{0.0, -1.0};
        const double hz = 0.5 * R + f * hc;
        const double hx = 0.5 * v;
        const double hzd = 0.5 * Rd;
        const double hxd = 0.5 * vd;
        return {{mi * (hz * y.s.a + hx * y.s.b), mi * (hx * y.s.a - hz * y.s.b)},
                {mi * (hzd * y.d.a + hxd * y.d.b), mi * (hxd * y.d.a - hzd * y.d.b)}};
    }
};

double checked_norm(const Spinor& sp, const char* who,
                    const HamiltonianParams& p, double t) {
    const double n = sp.norm();
    if (!std::isfinite(n) || n <= 0.0) {
        std::ostringstream os;
        os << "non-finite " << who << " amplitudes at t = " << t;
        throw IntegratorError(os.str(), p, t);
    }
    return n;
}

}  // namespace

ControlledRun run_controlled(const HamiltonianParams& params,
                             const QubitState& s0, const ControlLawConfig& law,
                             std::span<const double> t_grid,
                             const IntegratorConfig& cfg) {
    law.validate();
    cfg.validate();

    QubitState target0 = law.target.initial_state.value_or(s0);
    if (law.target.perturbation_angle != 0.0) {
        target0 = rotate_y(target0, law.target.perturbation_angle);
    }
    const HamiltonianParams target_p =
        law.target.fixed_hamiltonian.value_or(params);

    CoupledRhs rhs{params.R, params.v, target_p.R, target_p.v, law};
    PairState y{s0.spinor(), target0.spinor()};

    ControlledRun out;
    out.max_step_dv = -std::numeric_limits<double>::infinity();
    out.trajectory.samples.reserve(t_grid.size());
    out.target_trajectory.samples.reserve(t_grid.size());
    out.f_series.reserve(t_grid.size());
    out.v_series.reserve(t_grid.size());

    double t = 0.0;
    double prev_t = 0.0;
    double v_prev = distance_v(target0, s0);
    double max_drift = 0.0;

    auto normalized_v = [](const PairState& p) {
        const Complex ov = inner(p.s, p.d);
        return std::clamp(1.0 - std::norm(ov) / (p.s.norm_sq() * p.d.norm_sq()),
                          0.0, 1.0);
    };

    for (double t_target : t_grid) {
        if (!(std::isfinite(t_target) && t_target >= prev_t)) {
            throw std::invalid_argument(
                "run_controlled: t_grid must be nonnegative and nondecreasing");
        }
        prev_t = t_target;
        while (true) {
            const double remaining = t_target - t;
            if (remaining <= cfg.dt * 1e-9) {
                t = t_target;
                break;
            }
            const double h = std::min(cfg.dt, remaining);
            y = rk4_step(y, h, rhs);
            t += h;
            const double ns = checked_norm(y.s, "system", params, t);
            const double nd = checked_norm(y.d, "target", params, t);
            const double drift = std::max(std::abs(ns - 1.0), std::abs(nd - 1.0));
            max_drift = std::max(max_drift, drift);
            if (cfg.renormalize_every_step) {
                y.s *= 1.0 / ns;
                y.d *= 1.0 / nd;
            } else if (drift > cfg.norm_drift_tolerance) {
                std::ostringstream os;
                os << "norm drift " << drift << " at t = " << t
                   << " (R = " << params.R << ", v = " << params.v
                   << ", kappa = " << law.kappa << ")";
                throw IntegratorError(os.str(), params, t);
            }
            const double v_now = normalized_v(y);
            out.max_step_dv = std::max(out.max_step_dv, v_now - v_prev);
            v_prev = v_now;
        }

        const QubitState sys{(1.0 / y.s.norm()) * y.s};
        const QubitState tgt{(1.0 / y.d.norm()) * y.d};
        out.trajectory.samples.push_back({t_target, sys, bloch_from_state(sys)});
        out.target_trajectory.samples.push_back(
            {t_target, tgt, bloch_from_state(tgt)});
        out.f_series.push_back({t_target, control_f_general(tgt, sys, law)});
        out.v_series.push_back({t_target, distance_v(tgt, sys)});
    }

    out.trajectory.max_norm_drift = max_drift;
    out.target_trajectory.max_norm_drift = max_drift;
    return out;
}

}  // namespace blochreach
