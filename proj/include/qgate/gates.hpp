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

#include <array>
#include <cmath>

#include "qgate/qmath.hpp"

// Ideal gate unitaries of the native set and the simple two-level channel
// model: ideal gate followed by a ZZ crosstalk phase and per-qubit
// amplitude damping / pure dephasing, all as Liouville superoperators.
//
// Basis order is |00>, |01>, |10>, |11> with qubit 1 the left (slow) index.

namespace qgate::gates {

// ---------------------------------------------------------------------------
// Ideal unitaries
// ---------------------------------------------------------------------------

/// Controlled-phase gate: diag(1, 1, 1, e^{-i phi}).
inline ComplexMatrix u_cz(double phi) {
    ComplexMatrix u = ComplexMatrix::Identity(4, 4);
    u(3, 3) = std::exp(-kI * phi);
    return u;
}

/// Exchange gate on the {|01>,|10>} subspace with rotation angle theta and
/// drive phase eta. theta = pi gives an iSWAP.
inline ComplexMatrix u_iswap(double theta, double eta) {
    ComplexMatrix u = ComplexMatrix::Identity(4, 4);
    double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    u(1, 1) = c;
    u(2, 2) = c;
    u(1, 2) = kI * std::exp(kI * eta) * s;
    u(2, 1) = kI * std::exp(-kI * eta) * s;
    return u;
}

/// Virtual-Z frame rotation: diag(e^{-i phi/2}, e^{i phi/2}).
inline ComplexMatrix virtual_z(double phi) {
    ComplexMatrix u = ComplexMatrix::Zero(2, 2);
    u(0, 0) = std::exp(-kI * phi / 2.0);
    u(1, 1) = std::exp(kI * phi / 2.0);
    return u;
}

/// Rotation by `angle` about the XY-plane axis at azimuth beta:
/// exp(-i (angle/2) (cos(beta) X + sin(beta) Y)).
inline ComplexMatrix sq_rot(double beta, double angle) {
    double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
    ComplexMatrix u(2, 2);
    u(0, 0) = c;
    u(1, 1) = c;
    u(0, 1) = -kI * s * std::exp(-kI * beta);
    u(1, 0) = -kI * s * std::exp(kI * beta);
    return u;
}

/// Conditional phase accumulated by |11> under a ZZ shift zeta (Hz) for a
/// duration tau: diag(1, 1, 1, e^{-i 2 pi zeta tau}).
inline ComplexMatrix zz_phase_unitary(double zeta_hz, double tau_s) {
    return u_cz(2.0 * M_PI * zeta_hz * tau_s);
}

inline ComplexMatrix embed_q1(const ComplexMatrix& u2) {
    return kron(u2, ComplexMatrix::Identity(2, 2));
}

inline ComplexMatrix embed_q2(const ComplexMatrix& u2) {
    return kron(ComplexMatrix::Identity(2, 2), u2);
}

// ---------------------------------------------------------------------------
// Gate descriptors
// ---------------------------------------------------------------------------

struct GateKind {
    enum class Tag { CZ, ISwap, VirtualZ, SQRot };

    Tag tag = Tag::CZ;
    int qubit = 0;     // VirtualZ / SQRot target
    double angle = 0;  // CZ: phi, ISwap: theta, VirtualZ: phi, SQRot: rotation angle
    double axis = 0;   // ISwap: eta, SQRot: axis azimuth beta

    static GateKind cz(double phi) {
        GateKind g;
        g.tag = Tag::CZ;
        g.angle = wrap_angle(phi);
        return g;
    }
    static GateKind iswap(double theta, double eta) {
        GateKind g;
        g.tag = Tag::ISwap;
        g.angle = wrap_angle(theta);
        g.axis = wrap_angle(eta);
        return g;
    }
    static GateKind vz(int qubit, double phi) {
        GateKind g;
        g.tag = Tag::VirtualZ;
        g.qubit = qubit;
        g.angle = wrap_angle(phi);
        return g;
    }
    static GateKind rot(int qubit, double beta, double angle) {
        GateKind g;
        g.tag = Tag::SQRot;
        g.qubit = qubit;
        g.axis = wrap_angle(beta);
        g.angle = wrap_angle(angle);
        return g;
    }

    bool two_qubit() const { return tag == Tag::CZ || tag == Tag::ISwap; }

    /// Gate unitary embedded in the two-qubit space.
    ComplexMatrix unitary4() const {
        switch (tag) {
            case Tag::CZ:
                return u_cz(angle);
            case Tag::ISwap:
                return u_iswap(angle, axis);
            case Tag::VirtualZ:
                return qubit == 0 ? embed_q1(virtual_z(angle)) : embed_q2(virtual_z(angle));
            case Tag::SQRot:
                return qubit == 0 ? embed_q1(sq_rot(axis, angle)) : embed_q2(sq_rot(axis, angle));
        }
        return ComplexMatrix::Identity(4, 4);
    }

    /// Stable key for channel caching.
    std::array<long long, 4> key() const {
        auto q = [](double v) { return llround(v * 1e9); };
        return {(long long)tag * 4 + qubit, q(angle), q(axis), 0};
    }
};

// ---------------------------------------------------------------------------
// Simple noise model
// ---------------------------------------------------------------------------

/// Two-level noise parameters for the quantum-map model. Durations control
/// how much ZZ phase and decoherence each gate picks up; single-qubit gates
/// default to zero duration so all error is attributed to two-qubit gates.
struct SimpleNoiseModel {
    std::array<double, 2> t1{INFINITY, INFINITY};       // seconds
    std::array<double, 2> t2_star{INFINITY, INFINITY};  // seconds
    double zeta_hz = 0.0;                               // signed ZZ shift
    double tau_2q = 200e-9;                             // two-qubit gate duration
    double tau_1q = 0.0;                                // single-qubit gate duration
    bool symmetric_split = false;  // half the decoherence before, half after

    double t_phi(int q) const {
        double inv = 1.0 / t2_star[q] - 0.5 / t1[q];
        return inv > 0 ? 1.0 / inv : INFINITY;
    }

    void validate() const {
        for (int q = 0; q < 2; ++q) {
            if (1.0 / t2_star[q] - 0.5 / t1[q] < -1e-12)
                throw InvalidNoise("SimpleNoiseModel: T2* exceeds 2*T1 on qubit " +
                                   std::to_string(q + 1));
        }
    }
};

namespace detail {

inline SuperOperator kraus_to_superop(int dim, const std::vector<ComplexMatrix>& kraus) {
    ComplexMatrix s = ComplexMatrix::Zero(dim * dim, dim * dim);
    for (const auto& k : kraus) s += kron(k.conjugate(), k);
    return SuperOperator(dim, s);
}

/// Per-qubit amplitude damping (p = 1 - e^{-tau/T1}) and pure dephasing
/// (coherence factor e^{-tau/T_phi}) applied to both qubits.
inline SuperOperator decoherence_channel(const SimpleNoiseModel& noise, double tau) {
    std::vector<ComplexMatrix> kraus_q[2];
    for (int q = 0; q < 2; ++q) {
        double p = 1.0 - std::exp(-tau / noise.t1[q]);
        double lam = std::exp(-tau / noise.t_phi(q));
        ComplexMatrix k0(2, 2), k1(2, 2);
        k0 << 1, 0, 0, std::sqrt(1.0 - p);
        k1 << 0, std::sqrt(p), 0, 0;
        ComplexMatrix d0 = std::sqrt((1.0 + lam) / 2.0) * pauli_i();
        ComplexMatrix d1 = std::sqrt((1.0 - lam) / 2.0) * pauli_z();
        // dephasing after damping on this qubit
        kraus_q[q] = {d0 * k0, d0 * k1, d1 * k0, d1 * k1};
    }
    std::vector<ComplexMatrix> kraus_2q;
    for (const auto& a : kraus_q[0])
        for (const auto& b : kraus_q[1]) kraus_2q.push_back(kron(a, b));
    return kraus_to_superop(4, kraus_2q);
}

}  // namespace detail

/// Liouville channel of one noisy gate: ideal unitary, then the ZZ crosstalk
/// phase for the gate duration, then per-qubit damping and dephasing.
inline SuperOperator noisy_gate_channel(const GateKind& kind, const SimpleNoiseModel& noise) {
    noise.validate();
    double tau = kind.two_qubit() ? noise.tau_2q : noise.tau_1q;
    SuperOperator chan = unitary_to_superop(kind.unitary4());
    if (tau > 0.0) {
        if (noise.zeta_hz != 0.0)
            chan = chan.then(unitary_to_superop(zz_phase_unitary(noise.zeta_hz, tau)));
        if (noise.symmetric_split) {
            SuperOperator half = detail::decoherence_channel(noise, tau / 2.0);
            chan = half.then(chan).then(half);
        } else {
            chan = chan.then(detail::decoherence_channel(noise, tau));
        }
    }
    return chan;
}

}  // namespace qgate::gates
