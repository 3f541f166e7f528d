// Copyright 2026 the qgate authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "qgate/errors.hpp"

// Dense complex linear algebra shared by all modules: Kronecker products,
// the Liouville (superoperator) and chi-matrix representations of quantum
// channels, and state/process metrics.
//
// Conventions, fixed project-wide:
//  - vec() stacks matrix COLUMNS, so vec(A rho B) = (B^T (x) A) vec(rho).
//  - The two-qubit Pauli basis is ordered II, IX, IY, IZ, XI, ... , ZZ
//    (second qubit fastest) with unnormalized Paulis, so a unitary channel
//    has tr(chi) = 1 and tr(chi*chi) = 1.

namespace qgate {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// ---------------------------------------------------------------------------
// Elementary operators
// ---------------------------------------------------------------------------

inline ComplexMatrix pauli_i() { return ComplexMatrix::Identity(2, 2); }

inline ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0, -kI, kI, 0;
    return m;
}

inline ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

/// Lowering operator for a single mode with `levels` levels.
inline ComplexMatrix lowering_op(int levels) {
    ComplexMatrix a = ComplexMatrix::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

/// Number operator n = a^dag a.
inline ComplexMatrix number_op(int levels) {
    ComplexMatrix n = ComplexMatrix::Zero(levels, levels);
    for (int k = 0; k < levels; ++k) n(k, k) = double(k);
    return n;
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

inline bool is_hermitian(const ComplexMatrix& m, double tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const ComplexMatrix& u, double tol = 1e-10) {
    if (u.rows() != u.cols()) return false;
    ComplexMatrix r = u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols());
    return r.cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// Kronecker product, dims multiply.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Column-stacking vectorization.
inline ComplexVector vec(const ComplexMatrix& m) {
    return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

/// Inverse of vec() for a square matrix of dimension d.
inline ComplexMatrix unvec(const ComplexVector& v, int d) {
    if (v.size() != Eigen::Index(d) * d)
        throw DimensionMismatch("unvec: vector length does not match d*d");
    return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Density matrix over a Hilbert space of dimension dim().
struct DensityMatrix {
    ComplexMatrix mat;

    DensityMatrix() = default;
    explicit DensityMatrix(ComplexMatrix m) : mat(std::move(m)) {}

    int dim() const { return int(mat.rows()); }

    static DensityMatrix pure(const ComplexVector& psi) {
        ComplexVector n = psi / psi.norm();
        return DensityMatrix(n * n.adjoint());
    }

    /// Computational basis state |index> in dimension d.
    static DensityMatrix basis(int d, int index) {
        ComplexVector psi = ComplexVector::Zero(d);
        psi(index) = 1.0;
        return DensityMatrix(psi * psi.adjoint());
    }

    double purity() const { return (mat * mat).trace().real(); }

    /// Checks Hermiticity (1e-10), unit trace (1e-9) and positivity up to
    /// the -1e-9 eigenvalue floor. Throws InvariantViolation.
    void validate() const {
        if (mat.rows() != mat.cols())
            throw DimensionMismatch("DensityMatrix: non-square matrix");
        if (!is_hermitian(mat, 1e-10))
            throw InvariantViolation("DensityMatrix: not Hermitian within 1e-10");
        if (std::abs(mat.trace().real() - 1.0) > 1e-9 || std::abs(mat.trace().imag()) > 1e-9)
            throw InvariantViolation("DensityMatrix: trace deviates from 1 beyond 1e-9");
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(mat, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-9)
            throw InvariantViolation("DensityMatrix: negative eigenvalue below -1e-9 floor");
    }
};

/// Completely positive map in Liouville form: vec(rho') = mat * vec(rho).
struct SuperOperator {
    int hilbert_dim = 0;
    ComplexMatrix mat;

    SuperOperator() = default;
    SuperOperator(int d, ComplexMatrix m) : hilbert_dim(d), mat(std::move(m)) {
        if (mat.rows() != Eigen::Index(d) * d || mat.cols() != Eigen::Index(d) * d)
            throw DimensionMismatch("SuperOperator: matrix is not d^2 x d^2");
    }

    static SuperOperator identity(int d) {
        return SuperOperator(d, ComplexMatrix::Identity(d * d, d * d));
    }

    DensityMatrix apply(const DensityMatrix& rho) const {
        if (rho.dim() != hilbert_dim)
            throw DimensionMismatch("SuperOperator::apply: dimension mismatch");
        return DensityMatrix(unvec(mat * vec(rho.mat), hilbert_dim));
    }

    SuperOperator then(const SuperOperator& later) const {
        if (later.hilbert_dim != hilbert_dim)
            throw DimensionMismatch("SuperOperator::then: dimension mismatch");
        return SuperOperator(hilbert_dim, later.mat * mat);
    }
};

/// Process (chi) matrix of a two-qubit channel in the Pauli basis.
struct ProcessMatrix {
    ComplexMatrix chi;  // 16 x 16

    ProcessMatrix() = default;
    explicit ProcessMatrix(ComplexMatrix c) : chi(std::move(c)) {
        if (chi.rows() != 16 || chi.cols() != 16)
            throw DimensionMismatch("ProcessMatrix: expected 16x16 chi");
    }
};

// ---------------------------------------------------------------------------
// Pauli basis (two qubits, second qubit fastest)
// ---------------------------------------------------------------------------

inline const std::vector<ComplexMatrix>& pauli_basis_1q() {
    static const std::vector<ComplexMatrix> basis = {pauli_i(), pauli_x(), pauli_y(),
                                                     pauli_z()};
    return basis;
}

inline const std::vector<ComplexMatrix>& pauli_basis_2q() {
    static const std::vector<ComplexMatrix> basis = [] {
        std::vector<ComplexMatrix> b;
        b.reserve(16);
        for (const auto& p : pauli_basis_1q())
            for (const auto& q : pauli_basis_1q()) b.push_back(kron(p, q));
        return b;
    }();
    return basis;
}

// ---------------------------------------------------------------------------
// Channel representations
// ---------------------------------------------------------------------------

/// Liouville form of the unitary channel rho -> U rho U^dag,
/// S = conj(U) (x) U under column stacking.
inline SuperOperator unitary_to_superop(const ComplexMatrix& u) {
    if (u.rows() != u.cols())
        throw DimensionMismatch("unitary_to_superop: non-square input");
    ComplexMatrix r = u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols());
    if (r.cwiseAbs().maxCoeff() > 1e-8)
        throw NonUnitaryInput("unitary_to_superop: ||U^dag U - I|| > 1e-8");
    return SuperOperator(int(u.rows()), kron(u.conjugate(), u));
}

/// Change of basis from the Liouville representation to the chi matrix.
/// Restricted to two qubits (Hilbert dimension 4).
inline ProcessMatrix superop_to_chi(const SuperOperator& s) {
    if (s.hilbert_dim != 4)
        throw DimensionMismatch("superop_to_chi: expected Hilbert dimension 4");
    const auto& paulis = pauli_basis_2q();
    ComplexMatrix chi(16, 16);
    for (int m = 0; m < 16; ++m) {
        for (int n = 0; n < 16; ++n) {
            ComplexMatrix basis_mn = kron(paulis[n].transpose(), paulis[m]);
            chi(m, n) = (basis_mn.adjoint() * s.mat).trace() / 16.0;
        }
    }
    return ProcessMatrix(chi);
}

/// Inverse of superop_to_chi.
inline SuperOperator chi_to_superop(const ProcessMatrix& p) {
    const auto& paulis = pauli_basis_2q();
    ComplexMatrix s = ComplexMatrix::Zero(16, 16);
    for (int m = 0; m < 16; ++m)
        for (int n = 0; n < 16; ++n)
            s += p.chi(m, n) * kron(paulis[n].transpose(), paulis[m]);
    return SuperOperator(4, s);
}

/// Process fidelity tr(chi * chi_ideal), real part clamped to [0, 1].
inline double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi_ideal) {
    if (chi.chi.rows() != chi_ideal.chi.rows())
        throw DimensionMismatch("process_fidelity: dimension mismatch");
    double f = (chi.chi * chi_ideal.chi).trace().real();
    return std::clamp(f, 0.0, 1.0);
}

inline double process_infidelity(const ProcessMatrix& chi, const ProcessMatrix& chi_ideal) {
    return 1.0 - process_fidelity(chi, chi_ideal);
}

/// tr(rho^2).
inline double purity(const DensityMatrix& rho) { return rho.purity(); }

// ---------------------------------------------------------------------------
// Computational-subspace projection
// ---------------------------------------------------------------------------

struct ProjectionResult {
    DensityMatrix rho;  // 4x4, renormalized
    double leakage = 0.0;
};

/// Maps a multi-mode state onto the two-qubit computational subspace. The
/// first two modes are the qubits (levels 0 and 1 kept); any further modes
/// (the coupler) are pinned to their ground state. Population left outside
/// that subspace, including coupler excitation, is reported as leakage.
inline ProjectionResult project_computational(const DensityMatrix& rho_full,
                                              const std::vector<int>& dims) {
    if (dims.size() < 2)
        throw DimensionMismatch("project_computational: need at least two modes");
    Eigen::Index total = 1;
    for (int d : dims) total *= d;
    if (rho_full.mat.rows() != total)
        throw DimensionMismatch("project_computational: dims do not match state");

    // Strides for (q1, q2, rest...) with the last mode fastest.
    Eigen::Index stride_q2 = 1;
    for (size_t k = 2; k < dims.size(); ++k) stride_q2 *= dims[k];
    Eigen::Index stride_q1 = stride_q2 * dims[1];

    auto index_of = [&](int n1, int n2) { return n1 * stride_q1 + n2 * stride_q2; };

    ComplexMatrix comp(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            comp(i, j) = rho_full.mat(index_of(i >> 1, i & 1), index_of(j >> 1, j & 1));

    double trace = comp.trace().real();
    double leak = 1.0 - trace;
    if (trace < 1e-9)
        throw LeakageDominates("project_computational: computational trace below 1e-9");
    comp /= trace;
    ProjectionResult out;
    out.rho = DensityMatrix(0.5 * (comp + comp.adjoint().eval()));
    out.leakage = leak;
    return out;
}

// ---------------------------------------------------------------------------
// Small utilities used across modules
// ---------------------------------------------------------------------------

/// Wraps an angle to the principal interval (-pi, pi], ties toward +pi.
inline double wrap_angle(double phi) {
    const double two_pi = 2.0 * M_PI;
    phi = std::fmod(phi, two_pi);
    if (phi <= -M_PI) phi += two_pi;
    if (phi > M_PI) phi -= two_pi;
    return phi;
}

}  // namespace qgate
