#include "blochreach/qcore.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace blochreach {

QubitState::QubitState(Complex a, Complex b) : s_{a, b} {
    const double n = s_.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > norm_tolerance) {
        throw std::invalid_argument("QubitState: norm " + std::to_string(n) +
                                    " deviates from 1 by more than " +
                                    std::to_string(norm_tolerance));
    }
    s_ *= 1.0 / n;
}

BlochVector bloch_from_state(const QubitState& s) {
    const Complex ab = std::conj(s.a()) * s.b();
    return {2.0 * ab.real(), 2.0 * ab.imag(), std::norm(s.a()) - std::norm(s.b())};
}

QubitState state_from_bloch(const BlochVector& p) {
    const double n = p.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) {
        throw std::invalid_argument("state_from_bloch: |p| = " + std::to_string(n) +
                                    " is not a unit vector");
    }
    // a = cos(t/2) >= 0, b = sin(t/2) e^{i azimuth}; poles need no azimuth.
    const double half = 0.5 * std::acos(std::clamp(p.z / n, -1.0, 1.0));
    const double az = (p.x == 0.0 && p.y == 0.0) ? 0.0 : std::atan2(p.y, p.x);
    return QubitState{std::cos(half), std::sin(half) * std::polar(1.0, az)};
}

bool Operator2::is_hermitian(double tol) const {
    return max_abs_diff(*this, adjoint()) <= tol;
}

bool Operator2::is_unitary(double tol) const {
    return max_abs_diff(*this * adjoint(), identity()) <= tol;
}

Operator2& Operator2::operator+=(const Operator2& o) {
    e00 += o.e00;
    e01 += o.e01;
    e10 += o.e10;
    e11 += o.e11;
    return *this;
}

Operator2& Operator2::operator-=(const Operator2& o) {
    e00 -= o.e00;
    e01 -= o.e01;
    e10 -= o.e10;
    e11 -= o.e11;
    return *this;
}

double max_abs_diff(const Operator2& l, const Operator2& r) {
    return std::max(std::max(std::abs(l.e00 - r.e00), std::abs(l.e01 - r.e01)),
                    std::max(std::abs(l.e10 - r.e10), std::abs(l.e11 - r.e11)));
}

Operator2 linear_hamiltonian(const HamiltonianParams& p) {
    return {0.5 * p.R, 0.5 * p.v, 0.5 * p.v, -0.5 * p.R};
}

TransformParams::TransformParams(double theta, double phi)
    : theta_(theta), phi_(phi) {
    constexpr double pi = 3.14159265358979323846;
    if (!(theta >= 0.0 && theta <= pi)) {
        throw std::invalid_argument("TransformParams: theta = " +
                                    std::to_string(theta) + " outside [0, pi]");
    }
    if (!(phi >= 0.0 && phi < 2.0 * pi)) {
        throw std::invalid_argument("TransformParams: phi = " +
                                    std::to_string(phi) + " outside [0, 2pi)");
    }
}

Operator2 transform_f(const TransformParams& t) {
    const double c = std::cos(t.theta());
    const double s = std::sin(t.theta());
    const Complex ep = std::polar(1.0, t.phi());
    return {c, s * std::conj(ep), -s * ep, c};
}

Operator2 conjugate_hamiltonian(const Operator2& h, const TransformParams& t) {
    const Operator2 f = transform_f(t);
    return f.adjoint() * h * f;
}

PauliCoefficients pauli_coefficients(const Operator2& m) {
    return {0.5 * (m.e00 + m.e11).real(), m.e01.real(), -m.e01.imag(),
            0.5 * (m.e00 - m.e11).real()};
}

PauliCoefficients expand_transformed_coefficients(double r_nl, double v,
                                                  const TransformParams& t) {
    const double c = std::cos(t.theta());
    const double s = std::sin(t.theta());
    const double cp = std::cos(t.phi());
    const double sp = std::sin(t.phi());
    const double c2p = std::cos(2.0 * t.phi());
    const double s2p = std::sin(2.0 * t.phi());
    PauliCoefficients out;
    out.cz = 0.5 * r_nl * c * c - v * c * s * cp - 0.5 * r_nl * s * s;
    out.cx = 0.5 * v * c * c + r_nl * c * s * cp - 0.5 * v * s * s * c2p;
    out.cy = r_nl * c * s * sp - 0.5 * v * s * s * s2p;
    return out;
}

}  // namespace blochreach
