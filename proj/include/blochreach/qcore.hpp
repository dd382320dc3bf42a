#pragma once

#include <complex>
#include <cmath>

// Core two-level types: amplitudes, Bloch vectors, 2x2 operators and the
// rotating-frame transform. Units are dimensionless with hbar = 1; the basis
// is {|e>, |g>} and sigma_z |e> = +|e>.

namespace blochreach {

using Complex = std::complex<double>;

// Raw two-component amplitude vector. No normalization guarantee; integrator
// stages and other intermediates live here.
struct Spinor {
    Complex a{1.0, 0.0};  // amplitude on |e>
    Complex b{0.0, 0.0};  // amplitude on |g>

    double norm_sq() const { return std::norm(a) + std::norm(b); }
    double norm() const { return std::sqrt(norm_sq()); }

    Spinor& operator+=(const Spinor& o) { a += o.a; b += o.b; return *this; }
    Spinor& operator-=(const Spinor& o) { a -= o.a; b -= o.b; return *this; }
    Spinor& operator*=(double s) { a *= s; b *= s; return *this; }
    Spinor& operator*=(Complex s) { a *= s; b *= s; return *this; }

    friend Spinor operator+(Spinor l, const Spinor& r) { return l += r; }
    friend Spinor operator-(Spinor l, const Spinor& r) { return l -= r; }
    friend Spinor operator*(double s, Spinor v) { return v *= s; }
    friend Spinor operator*(Complex s, Spinor v) { return v *= s; }
};

// <u|v>
inline Complex inner(const Spinor& u, const Spinor& v) {
    return std::conj(u.a) * v.a + std::conj(u.b) * v.b;
}

// <s|sigma_z|s> without normalizing; equals |a|^2 - |b|^2 for unit vectors.
inline double sigma_z_expectation(const Spinor& s) {
    return std::norm(s.a) - std::norm(s.b);
}

// Unit-norm state. Construction rejects vectors whose norm deviates from 1 by
// more than norm_tolerance and renormalizes the rest, so downstream code can
// rely on |a|^2 + |b|^2 = 1 to machine precision.
class QubitState {
public:
    static constexpr double norm_tolerance = 1e-6;

    QubitState() = default;  // |e>
    QubitState(Complex a, Complex b);
    explicit QubitState(const Spinor& s) : QubitState(s.a, s.b) {}

    static QubitState excited() { return QubitState{}; }
    static QubitState ground() { return QubitState{Complex{0.0}, Complex{1.0}}; }

    Complex a() const { return s_.a; }
    Complex b() const { return s_.b; }
    const Spinor& spinor() const { return s_; }

private:
    Spinor s_;
};

// |<u|v>|^2; 1 iff equal up to global phase.
inline double fidelity(const QubitState& u, const QubitState& v) {
    return std::norm(inner(u.spinor(), v.spinor()));
}

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// p = (2 Re a*b, 2 Im a*b, |a|^2 - |b|^2); unit length for unit states.
BlochVector bloch_from_state(const QubitState& s);

// Inverse map; the global phase is fixed by making a real and nonnegative.
// Throws std::invalid_argument unless |p| is within 1e-6 of 1.
QubitState state_from_bloch(const BlochVector& p);

inline double expectation_sz(const QubitState& s) {
    return sigma_z_expectation(s.spinor());
}

// 2x2 complex matrix, row-major.
struct Operator2 {
    Complex e00, e01, e10, e11;

    static Operator2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Operator2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
    static Operator2 pauli_y() { return {0.0, {0.0, -1.0}, {0.0, 1.0}, 0.0}; }
    static Operator2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

    Operator2 adjoint() const {
        return {std::conj(e00), std::conj(e10), std::conj(e01), std::conj(e11)};
    }
    Complex trace() const { return e00 + e11; }
    Complex determinant() const { return e00 * e11 - e01 * e10; }

    Spinor apply(const Spinor& s) const {
        return {e00 * s.a + e01 * s.b, e10 * s.a + e11 * s.b};
    }

    bool is_hermitian(double tol) const;
    bool is_unitary(double tol) const;

    Operator2& operator+=(const Operator2& o);
    Operator2& operator-=(const Operator2& o);
    friend Operator2 operator+(Operator2 l, const Operator2& r) { return l += r; }
    friend Operator2 operator-(Operator2 l, const Operator2& r) { return l -= r; }
    friend Operator2 operator*(const Operator2& l, const Operator2& r) {
        return {l.e00 * r.e00 + l.e01 * r.e10, l.e00 * r.e01 + l.e01 * r.e11,
                l.e10 * r.e00 + l.e11 * r.e10, l.e10 * r.e01 + l.e11 * r.e11};
    }
    friend Operator2 operator*(Complex s, const Operator2& m) {
        return {s * m.e00, s * m.e01, s * m.e10, s * m.e11};
    }
    friend Operator2 operator*(double s, const Operator2& m) {
        return Complex{s} * m;
    }
};

// Largest absolute entrywise difference.
double max_abs_diff(const Operator2& l, const Operator2& r);

// Model parameters: level splitting R, coupling v, mean-field strength C
// (C = 0 is the linear model). All dimensionless.
struct HamiltonianParams {
    double R = 0.0;
    double v = 0.0;
    double C = 0.0;
};

// H = (R/2) sigma_z + (v/2) sigma_x
Operator2 linear_hamiltonian(const HamiltonianParams& p);

// Rotation angles for the frame transform; theta in [0, pi], phi in [0, 2pi).
// Out-of-range values are rejected at construction.
class TransformParams {
public:
    TransformParams(double theta, double phi);

    double theta() const { return theta_; }
    double phi() const { return phi_; }

private:
    double theta_;
    double phi_;
};

// F = [[cos t, sin t e^{-i p}], [-sin t e^{i p}, cos t]]; unitary with det 1.
Operator2 transform_f(const TransformParams& t);

// F^dagger H F. Preserves trace and determinant, hence the spectrum.
Operator2 conjugate_hamiltonian(const Operator2& h, const TransformParams& t);

// Coefficients of M = ci*I + cx*sigma_x + cy*sigma_y + cz*sigma_z;
// exact decomposition for Hermitian M.
struct PauliCoefficients {
    double ci = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double cz = 0.0;
};

PauliCoefficients pauli_coefficients(const Operator2& hermitian);

// Closed-form coefficients of F^dagger [(r_nl/2) sigma_z + (v/2) sigma_x] F:
//   cz = (r_nl/2) cos 2t - (v/2) sin 2t cos p
//   cx = (v/2) (cos^2 t - sin^2 t cos 2p) + (r_nl/2) sin 2t cos p
//   cy = -(v/2) sin^2 t sin 2p + (r_nl/2) sin 2t sin p
// and ci = 0. r_nl is the (possibly state-shifted) splitting.
PauliCoefficients expand_transformed_coefficients(double r_nl, double v,
                                                  const TransformParams& t);

}  // namespace blochreach
