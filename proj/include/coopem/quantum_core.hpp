// quantum_core.hpp — Two-emitter Liouville-space algebra: operators, Lindblad generators, propagators

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "coopem/errors.hpp"

namespace coopem::core {

using cd = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;
using Mat16 = Eigen::Matrix<cd, 16, 16>;
using Vec16 = Eigen::Matrix<cd, 16, 1>;

// Basis {|g1 g2>, |g1 e2>, |e1 g2>, |e1 e2>}: index = 2 m1 + m2, emitter 1 is the first tensor factor.
enum BasisState : int { gg = 0, ge = 1, eg = 2, ee = 3 };

inline constexpr int basis_index(int m1, int m2) { return 2 * m1 + m2; }

// Column stacking: vec(rho)[i + 4 j] = rho(i, j).
inline constexpr int liouville_index(int row, int col) { return row + 4 * col; }

struct EmitterOperator {
    Mat4 matrix = Mat4::Zero();
    std::string label;

    EmitterOperator adjoint() const { return {matrix.adjoint(), label + "^dag"}; }
    EmitterOperator operator*(const EmitterOperator& o) const { return {matrix * o.matrix, label + "*" + o.label}; }
};

namespace ops {

inline Mat2 lower2() {
    Mat2 m = Mat2::Zero();
    m(0, 1) = 1.0;  // |g><e|
    return m;
}

inline Mat4 on_emitter(const Mat2& a, int emitter) {
    if (emitter == 1) return Eigen::kroneckerProduct(a, Mat2::Identity()).eval();
    if (emitter == 2) return Eigen::kroneckerProduct(Mat2::Identity(), a).eval();
    throw InvalidArgument("emitter index must be 1 or 2");
}

inline EmitterOperator identity() { return {Mat4::Identity(), "1"}; }
inline EmitterOperator sigma_minus(int i) { return {on_emitter(lower2(), i), "s" + std::to_string(i) + "-"}; }
inline EmitterOperator sigma_plus(int i) { return {on_emitter(lower2().adjoint(), i), "s" + std::to_string(i) + "+"}; }

// (|e><e| - |g><g|)/2 on emitter i
inline EmitterOperator sigma_z(int i) {
    Mat2 z = Mat2::Zero();
    z(0, 0) = -0.5;
    z(1, 1) = 0.5;
    return {on_emitter(z, i), "s" + std::to_string(i) + "z"};
}

inline EmitterOperator excited_projector(int i) {
    Mat2 p = Mat2::Zero();
    p(1, 1) = 1.0;
    return {on_emitter(p, i), "n" + std::to_string(i)};
}

inline EmitterOperator sigma_S_minus() {
    return {(sigma_minus(1).matrix + sigma_minus(2).matrix) / std::sqrt(2.0), "sS-"};
}
inline EmitterOperator sigma_S_plus() { return {sigma_S_minus().matrix.adjoint(), "sS+"}; }
inline EmitterOperator sigma_A_minus() {
    return {(sigma_minus(1).matrix - sigma_minus(2).matrix) / std::sqrt(2.0), "sA-"};
}
inline EmitterOperator sigma_A_plus() { return {sigma_A_minus().matrix.adjoint(), "sA+"}; }

inline Vec4 ket(int index) {
    Vec4 v = Vec4::Zero();
    v(index) = 1.0;
    return v;
}
inline Vec4 psi_S() { return (ket(eg) + ket(ge)) / std::sqrt(2.0); }
inline Vec4 psi_A() { return (ket(eg) - ket(ge)) / std::sqrt(2.0); }

}  // namespace ops

// Detector-side mode sigma_D^- = (e^{-i phi1} s1^- + e^{-i phi2} s2^-)/sqrt(2)
struct DetectionModel {
    double phi1 = 0.0;
    double phi2 = 0.0;

    EmitterOperator lowering() const {
        const cd p1 = std::polar(1.0, -phi1), p2 = std::polar(1.0, -phi2);
        return {(p1 * ops::sigma_minus(1).matrix + p2 * ops::sigma_minus(2).matrix) / std::sqrt(2.0), "sD-"};
    }
};

struct DensityMatrix {
    Mat4 matrix = Mat4::Zero();
    double time = 0.0;
    bool normalized = true;  // false for post-measurement states, whose trace is the weight

    static DensityMatrix pure(const Vec4& psi, double t = 0.0) { return {psi * psi.adjoint(), t, true}; }
    static DensityMatrix basis(int index, double t = 0.0) { return pure(ops::ket(index), t); }

    cd trace() const { return matrix.trace(); }
    double weight() const { return matrix.trace().real(); }
    double n_gg() const { return matrix(gg, gg).real(); }
    double n_ge() const { return matrix(ge, ge).real(); }
    double n_eg() const { return matrix(eg, eg).real(); }
    double n_ee() const { return matrix(ee, ee).real(); }
    // <e1 g2| rho |g1 e2>
    cd c() const { return matrix(eg, ge); }
    double n_S() const { return (ops::psi_S().adjoint() * matrix * ops::psi_S())(0).real(); }
    double n_A() const { return (ops::psi_A().adjoint() * matrix * ops::psi_A())(0).real(); }

    bool is_hermitian(double tol = 1e-10) const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tol; }
    bool is_physical(double tol = 1e-10) const {
        if (!is_hermitian(tol)) return false;
        for (int i = 0; i < 4; ++i)
            if (matrix(i, i).real() < -tol) return false;
        return !normalized || std::abs(weight() - 1.0) <= tol;
    }

    Vec16 vec() const { return Eigen::Map<const Vec16>(matrix.data()); }
    static DensityMatrix from_vec(const Vec16& v, double t = 0.0, bool normalized = true) {
        DensityMatrix r;
        r.matrix = Eigen::Map<const Mat4>(v.data());
        r.time = t;
        r.normalized = normalized;
        return r;
    }
};

enum class DecayMode { Independent, Superradiant };

struct LindbladSpec {
    double gamma = 0.0;    // radiative rate, ps^-1
    double gamma_p = 0.0;  // incoherent pump, ps^-1
    double gamma_d = 0.0;  // pure dephasing, ps^-1
    DecayMode decay_mode = DecayMode::Independent;

    void validate() const {
        if (!(gamma >= 0.0) || !(gamma_p >= 0.0) || !(gamma_d >= 0.0))
            throw InvalidArgument("Lindblad rates must be non-negative");
    }
};

struct Superoperator {
    Mat16 matrix = Mat16::Zero();

    Vec16 apply(const Vec16& v) const { return matrix * v; }
    DensityMatrix apply(const DensityMatrix& r) const {
        return DensityMatrix::from_vec(matrix * r.vec(), r.time, r.normalized);
    }
    Superoperator operator*(const Superoperator& o) const { return {matrix * o.matrix}; }
};

// Superoperator of rho -> A rho B
inline Mat16 sandwich(const Mat4& A, const Mat4& B) { return Eigen::kroneckerProduct(B.transpose(), A).eval(); }

// L_O[rho] = O rho O^dag - 1/2 {O^dag O, rho}
inline Mat16 dissipator(const Mat4& O) {
    const Mat4 OdO = O.adjoint() * O;
    const Mat4 I = Mat4::Identity();
    return sandwich(O, O.adjoint()) - 0.5 * sandwich(OdO, I) - 0.5 * sandwich(I, OdO);
}

inline Superoperator lindblad_generator(const LindbladSpec& spec) {
    spec.validate();
    Superoperator L;
    for (int i : {1, 2}) {
        if (spec.gamma_p > 0) L.matrix += spec.gamma_p * dissipator(ops::sigma_plus(i).matrix);
        if (spec.gamma_d > 0) L.matrix += spec.gamma_d * dissipator(ops::sigma_z(i).matrix);
    }
    if (spec.gamma > 0) {
        if (spec.decay_mode == DecayMode::Independent) {
            for (int i : {1, 2}) L.matrix += spec.gamma * dissipator(ops::sigma_minus(i).matrix);
        } else {
            L.matrix += 2.0 * spec.gamma * dissipator(ops::sigma_S_minus().matrix);
        }
    }
    return L;
}

// Single-emitter generator on the column-stacked 2x2 block; two-emitter Independent generator = L1 (x) 1 + 1 (x) L1
inline Mat4 single_emitter_generator(const LindbladSpec& spec) {
    spec.validate();
    if (spec.decay_mode != DecayMode::Independent && spec.gamma > 0)
        throw InvalidArgument("single_emitter_generator: collective decay does not factorize");
    auto diss = [](const Mat2& O) -> Mat4 {
        const Mat2 OdO = O.adjoint() * O;
        const Mat2 I = Mat2::Identity();
        return Eigen::kroneckerProduct(Mat2(O.conjugate()), O).eval() - 0.5 * Eigen::kroneckerProduct(I, OdO).eval() -
               0.5 * Eigen::kroneckerProduct(Mat2(OdO.transpose()), I).eval();
    };
    Mat2 z = Mat2::Zero();
    z(0, 0) = -0.5;
    z(1, 1) = 0.5;
    Mat4 L = Mat4::Zero();
    if (spec.gamma_p > 0) L += spec.gamma_p * diss(ops::lower2().adjoint());
    if (spec.gamma_d > 0) L += spec.gamma_d * diss(z);
    if (spec.gamma > 0) L += spec.gamma * diss(ops::lower2());
    return L;
}

// Pade scaling-and-squaring exponential (Eigen MatrixFunctions)
inline Superoperator propagator(const Superoperator& L, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("propagator: dt must be positive");
    const Mat16 A = L.matrix * dt;
    return {A.exp()};
}

inline DensityMatrix steady_state(const Superoperator& L, double rel_tol = 1e-10) {
    const double scale = L.matrix.cwiseAbs().maxCoeff();
    if (scale == 0.0) throw NoPumpNoDecay("steady_state: generator is zero");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(L.matrix), Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int null_dim = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) <= rel_tol * s(0)) ++null_dim;
    if (null_dim == 0) throw DegenerateSteadyState("steady_state: no stationary state found");
    if (null_dim > 1) throw DegenerateSteadyState("steady_state: null space dimension " + std::to_string(null_dim));
    const Vec16 v = svd.matrixV().col(15);
    DensityMatrix r = DensityMatrix::from_vec(v);
    r.matrix /= r.trace();
    r.matrix = 0.5 * (r.matrix + r.matrix.adjoint()).eval();
    return r;
}

inline DensityMatrix apply_jump(const DensityMatrix& rho, const EmitterOperator& op) {
    DensityMatrix r;
    r.matrix = op.matrix * rho.matrix * op.matrix.adjoint();
    r.time = rho.time;
    r.normalized = false;
    return r;
}

inline double expectation(const DensityMatrix& rho, const EmitterOperator& op) {
    return (op.matrix * rho.matrix).trace().real();
}

}  // namespace coopem::core
