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

#include <cmath>
#include <vector>

#include "qgate/device.hpp"
#include "qgate/gates.hpp"
#include "qgate/qmath.hpp"
#include "qgate/util.hpp"

// External error sources: AWG trigger-time jitter converted to drive-phase
// jitter, drive-amplitude-dependent qubit dephasing, and spurious sideband
// tones added to the flux drive.

namespace qgate::noise {

// ---------------------------------------------------------------------------
// Trigger-time phase jitter
// ---------------------------------------------------------------------------

/// AWG reaction-time jitter quantized in clock cycles. A trigger lands a
/// uniformly distributed n in {1..max_cycles} cycles late, which up-converts
/// to a drive-phase offset delta_phi = omega_sb * n * clock_period.
struct PhaseJitterModel {
    double sideband_hz = 0.0;      // omega_sb / 2pi
    double clock_period = 833e-12;  // seconds
    int max_cycles = 5;
    bool per_gate = false;  // default: one draw per sequence trigger

    void validate() const {
        if (clock_period <= 0) throw InvalidNoise("PhaseJitterModel: clock_period <= 0");
        if (max_cycles < 1) throw InvalidNoise("PhaseJitterModel: max_cycles < 1");
    }

    /// Phase offset for a given cycle count.
    double phase_for_cycles(int n) const {
        return 2.0 * M_PI * sideband_hz * double(n) * clock_period;
    }
};

/// One jitter draw: delta_phi = 2 pi f_sb * n * clock_period with n uniform
/// in {1..max_cycles}.
inline double sample_phase_jitter(const PhaseJitterModel& model, std::mt19937_64& rng) {
    model.validate();
    if (model.sideband_hz == 0.0) return 0.0;
    int n = 1 + int(bounded_rand(rng, uint64_t(model.max_cycles)));
    return model.phase_for_cycles(n);
}

// ---------------------------------------------------------------------------
// Amplitude-dependent dephasing
// ---------------------------------------------------------------------------

/// Quadratic map from the two-qubit drive's Rabi amplitude to the qubit
/// frequency-fluctuation width sigma_df, modeled as white dephasing with
/// effective T2* = 1 / (2 pi sigma_df).
struct AmplitudeDephasingModel {
    double c0 = 0.0;  // Hz, fluctuation floor
    double c2 = 0.0;  // Hz per Hz^2 of Rabi amplitude

    double sigma_df(double rabi_hz) const { return c0 + c2 * rabi_hz * rabi_hz; }
};

inline double effective_t2(const AmplitudeDephasingModel& model, double rabi_hz) {
    if (rabi_hz < 0) throw InvalidNoise("effective_t2: negative Rabi amplitude");
    double sigma = model.sigma_df(rabi_hz);
    if (sigma <= 0) throw NegativeSigma("effective_t2: sigma_df <= 0");
    return 1.0 / (2.0 * M_PI * sigma);
}

/// Coefficients such that effective_t2(0) = t2_undriven and
/// effective_t2(rabi_max) = t2_at_max.
inline AmplitudeDephasingModel amplitude_dephasing_from_anchors(double t2_undriven,
                                                                double rabi_max,
                                                                double t2_at_max) {
    AmplitudeDephasingModel m;
    m.c0 = 1.0 / (2.0 * M_PI * t2_undriven);
    m.c2 = (1.0 / (2.0 * M_PI * t2_at_max) - m.c0) / (rabi_max * rabi_max);
    return m;
}

// ---------------------------------------------------------------------------
// Jitter applied to a gate channel
// ---------------------------------------------------------------------------

/// Shifts the drive phase of an exchange-type channel by delta_phi via
/// conjugation with W = Z1(-delta) (x) Z2(+delta) at half angles, which
/// maps u_iswap(theta, eta) to u_iswap(theta, eta + delta_phi). W is a
/// product of single-qubit frame rotations, so per-qubit damping and
/// dephasing are covariant and the result equals rebuilding the channel at
/// the shifted drive phase. CZ-type channels commute with the shift and
/// are returned unchanged.
inline SuperOperator apply_jitter_to_channel(const SuperOperator& channel,
                                             const gates::GateKind& kind, double delta_phi) {
    if (kind.tag != gates::GateKind::Tag::ISwap || delta_phi == 0.0) return channel;
    ComplexMatrix w =
        kron(gates::virtual_z(-delta_phi / 2.0), gates::virtual_z(delta_phi / 2.0));
    SuperOperator sw = unitary_to_superop(w);
    SuperOperator swi = unitary_to_superop(ComplexMatrix(w.adjoint()));
    return SuperOperator(4, ComplexMatrix(sw.mat * channel.mat * swi.mat));
}

// ---------------------------------------------------------------------------
// Spurious drive tones
// ---------------------------------------------------------------------------

/// Extra coherent tones sharing the main pulse envelope, e.g. mixer
/// harmonics at multiples of the sideband frequency.
struct SpuriousTone {
    double frequency_hz = 0.0;
    double relative_amplitude = 0.0;  // scales the main-tone flux amplitude
    double phase = 0.0;
};

struct SpuriousToneModel {
    std::vector<SpuriousTone> tones;

    void validate() const {
        for (const auto& t : tones)
            if (t.relative_amplitude < 0)
                throw InvalidNoise("SpuriousToneModel: negative relative amplitude");
    }
};

/// Composite drive waveform: the main pulse plus the listed tones, all
/// under the same flat-top envelope.
inline device::FluxPulse add_spurious_tones(const device::FluxPulse& pulse,
                                            const SpuriousToneModel& model) {
    model.validate();
    device::FluxPulse out = pulse;
    for (const auto& t : model.tones) {
        if (t.relative_amplitude == 0.0) continue;
        out.extra_tones.push_back({t.frequency_hz, t.relative_amplitude, t.phase});
    }
    return out;
}

}  // namespace qgate::noise
