// Test-only reference implementations, kept independent of the library code
// paths they are used to check.

#pragma once

#include <random>

#include "qgate/qmath.hpp"

namespace oracle {

using qgate::Complex;
using qgate::ComplexMatrix;
using qgate::ComplexVector;

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline ComplexMatrix random_gaussian(int rows, int cols, std::mt19937_64& g) {
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Complex(n(g), n(g));
    return m;
}

/// Haar-random unitary via QR with phase correction.
inline ComplexMatrix haar_unitary(int dim, std::mt19937_64& g) {
    ComplexMatrix a = random_gaussian(dim, dim, g);
    Eigen::HouseholderQR<ComplexMatrix> qr(a);
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < dim; ++i) {
        Complex d = r(i, i);
        q.col(i) *= d / std::abs(d);
    }
    return q;
}

/// Random full-rank density matrix.
inline qgate::DensityMatrix random_density(int dim, std::mt19937_64& g) {
    ComplexMatrix b = random_gaussian(dim, dim, g);
    ComplexMatrix rho = b * b.adjoint();
    rho /= rho.trace();
    return qgate::DensityMatrix(rho);
}

/// Random CP trace-preserving map from a normalized random Kraus set.
inline qgate::SuperOperator random_cptp(int dim, int n_kraus, std::mt19937_64& g) {
    std::vector<ComplexMatrix> kraus;
    ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
    for (int k = 0; k < n_kraus; ++k) {
        kraus.push_back(random_gaussian(dim, dim, g));
        total += kraus.back().adjoint() * kraus.back();
    }
    // normalize so that sum K^dag K = I
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(total);
    ComplexMatrix inv_sqrt = es.operatorInverseSqrt();
    ComplexMatrix s = ComplexMatrix::Zero(dim * dim, dim * dim);
    for (auto& k : kraus) {
        k = k * inv_sqrt;
        s += qgate::kron(k.conjugate(), k);
    }
    return qgate::SuperOperator(dim, s);
}

/// Chi matrix from the Choi state: chi_mn = <<P_m| C |P_n>> / d^2 with
/// |P>> = (P (x) I)|Omega>. Independent of the library's basis-change code.
inline ComplexMatrix chi_from_choi(const qgate::SuperOperator& s) {
    const int d = s.hilbert_dim;
    // Choi = sum_ij E(|i><j|) (x) |i><j|
    ComplexMatrix choi = ComplexMatrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            ComplexMatrix eij = ComplexMatrix::Zero(d, d);
            eij(i, j) = 1.0;
            ComplexMatrix out = qgate::unvec(s.mat * qgate::vec(eij), d);
            choi += qgate::kron(out, eij);
        }
    }
    ComplexVector omega = ComplexVector::Zero(d * d);
    for (int i = 0; i < d; ++i) omega(i * d + i) = 1.0;
    const auto& paulis = qgate::pauli_basis_2q();
    ComplexMatrix chi(16, 16);
    for (int m = 0; m < 16; ++m) {
        ComplexVector pm = qgate::kron(paulis[m], ComplexMatrix::Identity(d, d)) * omega;
        for (int n = 0; n < 16; ++n) {
            ComplexVector pn = qgate::kron(paulis[n], ComplexMatrix::Identity(d, d)) * omega;
            chi(m, n) = pm.dot(choi * pn) / double(d * d);  // dot() conjugates pm
        }
    }
    return chi;
}

/// Two-level Rabi transfer probability at time t for angular Rabi rate
/// omega and angular detuning delta.
inline double rabi_transfer(double omega, double delta, double t) {
    double w = std::sqrt(omega * omega + delta * delta);
    double s = std::sin(w * t / 2.0);
    return (omega * omega) / (w * w) * s * s;
}

inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return (a - b).cwiseAbs().maxCoeff() <= tol;
}

/// Equality of unitaries up to global phase.
inline bool phase_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
    Complex ip = (a.adjoint() * b).trace();
    if (std::abs(ip) < 1e-12) return false;
    Complex phase = ip / std::abs(ip);
    return approx_equal(a * phase, b, tol);
}

}  // namespace oracle
