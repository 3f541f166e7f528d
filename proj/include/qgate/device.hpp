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
#include <string>
#include <vector>

#include "qgate/qmath.hpp"

// Physical model of two fixed-frequency transmons coupled through a
// flux-tunable coupler: device parameters, the coupler frequency under flux,
// Gaussian flat-top drive waveforms, the three-mode lab-frame Hamiltonian
// and the perturbative static ZZ shift.
//
// Conventions: parameter structs store ordinary frequencies in Hz and times
// in seconds; Hamiltonians are returned in angular units (rad/s). Mode order
// is q1 (x) q2 (x) coupler, last mode fastest.

namespace qgate::device {

struct TransmonParams {
    double frequency_hz = 0.0;       // omega/2pi
    double anharmonicity_hz = 0.0;   // negative
    double coupling_hz = 0.0;        // to the tunable coupler
    double t1_s = INFINITY;
    double t2_echo_s = INFINITY;
    double t2_star_s = INFINITY;

    std::vector<std::string> validate(const std::string& label) const {
        if (frequency_hz <= 0) throw ConfigError(label + ": frequency must be positive");
        if (anharmonicity_hz >= 0) throw ConfigError(label + ": anharmonicity must be negative");
        if (t1_s <= 0 || t2_star_s <= 0) throw ConfigError(label + ": T1 and T2* must be positive");
        std::vector<std::string> warnings;
        if (t2_star_s > 2.0 * t1_s + 1e-12)
            warnings.push_back(label + ": T2* exceeds 2*T1, dephasing rate clamped to zero");
        return warnings;
    }
};

struct CouplerParams {
    double max_frequency_hz = 0.0;   // omega_c^0 / 2pi at zero flux
    double anharmonicity_hz = 0.0;
    double asymmetry = 0.0;          // SQUID junction asymmetry d in [0, 1)
    double dc_flux = 0.0;            // Phi_DC in units of Phi_0
    double t1_s = INFINITY;
    double t2_star_s = INFINITY;

    void validate() const {
        if (asymmetry < 0.0 || asymmetry >= 1.0)
            throw ConfigError("coupler: asymmetry must be in [0, 1)");
        if (std::abs(dc_flux) >= 0.5) throw ConfigError("coupler: |dc_flux| must be < 0.5");
        if (max_frequency_hz <= 0) throw ConfigError("coupler: max_frequency must be positive");
    }
};

struct DeviceModel {
    TransmonParams q1;
    TransmonParams q2;
    CouplerParams tc;
    double g12_hz = 0.0;        // direct qubit-qubit coupling (not reported; default 0)
    int levels_per_mode = 3;
    double zz_term_hz = 0.0;    // extra ZZ interaction zeta * |11><11|, for
                                // compensation or injection studies

    int hilbert_dim() const {
        return levels_per_mode * levels_per_mode * levels_per_mode;
    }
    std::vector<int> dims() const {
        return {levels_per_mode, levels_per_mode, levels_per_mode};
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> warnings = q1.validate("q1");
        auto w2 = q2.validate("q2");
        warnings.insert(warnings.end(), w2.begin(), w2.end());
        tc.validate();
        if (levels_per_mode < 2) throw ConfigError("levels_per_mode must be >= 2");
        if (q1.frequency_hz == q2.frequency_hz)
            throw ConfigError("q1 and q2 frequencies must differ");
        return warnings;
    }
};

/// Extra coherent drive tone sharing the main pulse envelope, e.g. a mixer
/// harmonic. The amplitude is relative to the main tone.
struct DriveTone {
    double frequency_hz = 0.0;
    double relative_amplitude = 0.0;
    double phase = 0.0;
};

/// Parametric flux drive: Gaussian flat top with rise/fall flanks.
struct FluxPulse {
    double amplitude = 0.0;    // delta_Phi in units of Phi_0
    double frequency_hz = 0.0; // omega_Phi / 2pi
    double phase = 0.0;        // eta
    double plateau_s = 0.0;
    double flank_s = 5e-9;
    std::vector<DriveTone> extra_tones;

    double duration() const { return plateau_s + 2.0 * flank_s; }

    void validate() const {
        if (amplitude < 0) throw ConfigError("FluxPulse: amplitude must be >= 0");
        if (plateau_s < 0) throw ConfigError("FluxPulse: plateau must be >= 0");
        if (flank_s <= 0) throw ConfigError("FluxPulse: flank must be > 0");
    }

    /// Flat-top envelope with Gaussian flanks (sigma = flank/2.5), clipped
    /// and rescaled so env(0) = 0 and env(flank) = 1.
    double envelope(double t) const {
        double d = duration();
        if (t < 0.0 || t > d) throw TimeOutOfRange("FluxPulse::envelope: t outside pulse");
        double sigma = flank_s / 2.5;
        double clip = std::exp(-flank_s * flank_s / (2.0 * sigma * sigma));
        auto rise = [&](double x) {
            double g = std::exp(-(x - flank_s) * (x - flank_s) / (2.0 * sigma * sigma));
            return (g - clip) / (1.0 - clip);
        };
        if (t < flank_s) return rise(t);
        if (t > d - flank_s) return rise(d - t);
        return 1.0;
    }
};

// ---------------------------------------------------------------------------
// Coupler frequency and drive waveform
// ---------------------------------------------------------------------------

/// Flux-dependent coupler frequency
/// omega_c = omega_c^0 sqrt(gamma |cos(pi Phi)|), gamma = sqrt(1 + d^2 tan^2(pi Phi)),
/// evaluated in the pole-free form omega_c^0 (cos^2 + d^2 sin^2)^(1/4).
/// A symmetric SQUID (d = 0) has no transition frequency at half-integer
/// flux; that case is rejected.
inline double coupler_frequency(const CouplerParams& tc, double flux_phi0) {
    double x = M_PI * flux_phi0;
    double c = std::cos(x), s = std::sin(x);
    if (tc.asymmetry == 0.0 && std::abs(c) < 1e-9)
        throw FluxOutOfRange("coupler_frequency: symmetric SQUID at half-integer flux");
    double under = c * c + tc.asymmetry * tc.asymmetry * s * s;
    return tc.max_frequency_hz * std::pow(under, 0.25);
}

/// Flux through the SQUID loop at time t during the pulse:
/// Phi(t) = Phi_DC + env(t) * delta_Phi * cos(2 pi f t + eta), plus any
/// extra tones sharing the same envelope.
inline double flux_waveform(const FluxPulse& pulse, const CouplerParams& tc, double t) {
    double carrier = std::cos(2.0 * M_PI * pulse.frequency_hz * t + pulse.phase);
    for (const auto& tone : pulse.extra_tones)
        carrier += tone.relative_amplitude *
                   std::cos(2.0 * M_PI * tone.frequency_hz * t + tone.phase);
    return tc.dc_flux + pulse.envelope(t) * pulse.amplitude * carrier;
}

// ---------------------------------------------------------------------------
// Hamiltonian
// ---------------------------------------------------------------------------

namespace detail {

/// Embeds a single-mode operator on mode `which` of the three-mode space.
inline ComplexMatrix embed(const ComplexMatrix& op, int which, int levels) {
    ComplexMatrix id = ComplexMatrix::Identity(levels, levels);
    const ComplexMatrix& a = which == 0 ? op : id;
    const ComplexMatrix& b = which == 1 ? op : id;
    const ComplexMatrix& c = which == 2 ? op : id;
    return kron(kron(a, b), c);
}

/// Projector onto q1 = 1 and q2 = 1 (any coupler state).
inline ComplexMatrix p11(int levels) {
    ComplexMatrix one = ComplexMatrix::Zero(levels, levels);
    one(1, 1) = 1.0;
    return kron(kron(one, one), ComplexMatrix::Identity(levels, levels));
}

}  // namespace detail

/// Lab-frame Hamiltonian (rad/s) at a fixed flux:
/// H/hbar = sum_m [w_m n_m + (alpha_m/2) n_m(n_m-1)]
///        + g_1 (a_1^dag a_c + h.c.) + g_2 (a_2^dag a_c + h.c.)
///        + g_12 (a_1^dag a_2 + h.c.) + zz_term |11><11|
inline ComplexMatrix build_hamiltonian(const DeviceModel& model, double flux_phi0) {
    const int n = model.levels_per_mode;
    const double two_pi = 2.0 * M_PI;
    ComplexMatrix a = lowering_op(n);
    ComplexMatrix num = number_op(n);
    ComplexMatrix duff = ComplexMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) duff(k, k) = 0.5 * double(k) * double(k - 1);

    double wc = coupler_frequency(model.tc, flux_phi0);
    ComplexMatrix h = ComplexMatrix::Zero(model.hilbert_dim(), model.hilbert_dim());
    const double freq[3] = {model.q1.frequency_hz, model.q2.frequency_hz, wc};
    const double anh[3] = {model.q1.anharmonicity_hz, model.q2.anharmonicity_hz,
                           model.tc.anharmonicity_hz};
    for (int m = 0; m < 3; ++m) {
        h += two_pi * freq[m] * detail::embed(num, m, n);
        h += two_pi * anh[m] * detail::embed(duff, m, n);
    }
    ComplexMatrix a1 = detail::embed(a, 0, n), a2 = detail::embed(a, 1, n),
                  ac = detail::embed(a, 2, n);
    h += two_pi * model.q1.coupling_hz * (a1.adjoint() * ac + ac.adjoint() * a1);
    h += two_pi * model.q2.coupling_hz * (a2.adjoint() * ac + ac.adjoint() * a2);
    if (model.g12_hz != 0.0)
        h += two_pi * model.g12_hz * (a1.adjoint() * a2 + a2.adjoint() * a1);
    if (model.zz_term_hz != 0.0) h += two_pi * model.zz_term_hz * detail::p11(n);
    return h;
}

// ---------------------------------------------------------------------------
// Static ZZ shift
// ---------------------------------------------------------------------------

/// Coupler-mediated static ZZ shift (Hz) from second-order perturbation
/// theory in the effective qubit-qubit coupling:
///
///   zeta = -2 J^2 (a1+a2) / ((D12+a1)(a2-D12))
///
/// with D_i the qubit-coupler detunings at the DC bias and D12 = f1 - f2.
/// The sign follows the repulsion of |11> by |20> and |02>; direct and
/// coupler-mediated couplings add coherently in the effective
/// J = g12 + g1 g2 (D1+D2)/(2 D1 D2). Cross-checked against exact
/// diagonalization of build_hamiltonian (agreement ~5% at the default
/// device, degrading as the dispersive parameter g/D grows).
inline double static_zz_shift(const DeviceModel& model) {
    double fc = coupler_frequency(model.tc, model.tc.dc_flux);
    double d1 = model.q1.frequency_hz - fc;
    double d2 = model.q2.frequency_hz - fc;
    double d12 = model.q1.frequency_hz - model.q2.frequency_hz;
    double a1 = model.q1.anharmonicity_hz, a2 = model.q2.anharmonicity_hz;
    double den1 = d12 + a1, den2 = a2 - d12;
    if (std::abs(den1) < 1e3 || std::abs(den2) < 1e3)
        throw ResonantDenominator("static_zz_shift: |11>-|20/02> gap below 1 kHz");
    if (std::abs(d1) < 1e3 || std::abs(d2) < 1e3)
        throw ResonantDenominator("static_zz_shift: qubit-coupler detuning below 1 kHz");
    double j = model.g12_hz +
               model.q1.coupling_hz * model.q2.coupling_hz * (d1 + d2) / (2.0 * d1 * d2);
    return -2.0 * j * j * (a1 + a2) / (den1 * den2);
}

// ---------------------------------------------------------------------------
// Dressed-level diagnostics (exact diagonalization)
// ---------------------------------------------------------------------------

struct DressedLevels {
    // energies (rad/s) of the dressed states with maximal overlap on the
    // bare computational states |000>, |010>, |100>, |110>
    double e00 = 0, e01 = 0, e10 = 0, e11 = 0;
    double e20 = 0;  // bare |200>

    double zz_hz() const { return (e11 + e00 - e01 - e10) / (2.0 * M_PI); }
    /// Dressed iSWAP drive frequency (|01> <-> |10> splitting).
    double f_delta_hz() const { return ((e01 - e00) - (e10 - e00)) / (2.0 * M_PI); }
    /// Dressed CZ drive frequency (|11> <-> |20| splitting).
    double f_alpha_hz() const { return (e11 - e20) / (2.0 * M_PI); }
};

/// Exact static spectrum at the DC bias, matched to bare labels by largest
/// eigenvector overlap.
inline DressedLevels dressed_levels(const DeviceModel& model) {
    ComplexMatrix h = build_hamiltonian(model, model.tc.dc_flux);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const int n = model.levels_per_mode;
    auto bare_index = [&](int n1, int n2, int nc) { return (n1 * n + n2) * n + nc; };
    auto energy_of = [&](int bare) {
        int best = 0;
        double best_overlap = -1.0;
        for (int k = 0; k < h.rows(); ++k) {
            double ov = std::norm(es.eigenvectors()(bare, k));
            if (ov > best_overlap) {
                best_overlap = ov;
                best = k;
            }
        }
        return es.eigenvalues()(best);
    };
    DressedLevels out;
    out.e00 = energy_of(bare_index(0, 0, 0));
    out.e01 = energy_of(bare_index(0, 1, 0));
    out.e10 = energy_of(bare_index(1, 0, 0));
    out.e11 = energy_of(bare_index(1, 1, 0));
    if (n > 2) out.e20 = energy_of(bare_index(2, 0, 0));
    return out;
}

/// Frequency (Hz) of the qubit-difference transition including dressing,
/// used to center chevron scans.
inline double dressed_zz_hz(const DeviceModel& model) { return dressed_levels(model).zz_hz(); }

// ---------------------------------------------------------------------------
// SI-table default device
// ---------------------------------------------------------------------------

/// Device parameters of the published experiment (flux bias 0.15 Phi_0).
inline DeviceModel paper_device() {
    DeviceModel m;
    m.q1.frequency_hz = 5.089e9;
    m.q1.anharmonicity_hz = -310e6;
    m.q1.coupling_hz = 116e6;
    m.q1.t1_s = 70e-6;
    m.q1.t2_echo_s = 81e-6;
    m.q1.t2_star_s = 50e-6;
    m.q2.frequency_hz = 6.189e9;
    m.q2.anharmonicity_hz = -286e6;
    m.q2.coupling_hz = 142e6;
    m.q2.t1_s = 23e-6;
    m.q2.t2_echo_s = 26e-6;
    m.q2.t2_star_s = 27e-6;
    m.tc.max_frequency_hz = 8.1e9;
    m.tc.anharmonicity_hz = -235e6;
    m.tc.asymmetry = 0.36;
    m.tc.dc_flux = 0.15;
    m.tc.t1_s = 15e-6;
    m.tc.t2_star_s = 7e-6;
    m.g12_hz = 0.0;
    m.levels_per_mode = 3;
    return m;
}

}  // namespace qgate::device
