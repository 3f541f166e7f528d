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
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "qgate/clifford.hpp"
#include "qgate/fit.hpp"
#include "qgate/gates.hpp"
#include "qgate/noise.hpp"
#include "qgate/util.hpp"

// Randomized benchmarking: sequence sampling over the two-qubit Clifford
// group, standard / interleaved / purity RB against a pluggable gate-channel
// backend, decay fitting and per-length fidelity statistics.
//
// Work items (length, randomization) draw their RNG streams from
// derive_stream(seed, m, r, salt), so campaigns are reproducible and
// schedule-independent.

namespace qgate::rb {

enum class NativeSet { CZ, ISwap };

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

struct RBSequence {
    int m = 0;
    std::vector<int> elements;  // group indices, application order
    int recovery = -1;          // group index
    uint64_t seed = 0;
};

/// Samples m i.i.d. uniform Cliffords and computes the recovery element by
/// group-inverse lookup. Deterministic under the seed.
inline RBSequence sample_sequence(int m, uint64_t rng_seed) {
    const auto& group = cliff::CliffordGroup::instance();
    RBSequence seq;
    seq.m = m;
    seq.seed = rng_seed;
    auto rng = make_rng(rng_seed);
    cliff::Matrix4 u = cliff::Matrix4::Identity();
    for (int k = 0; k < m; ++k) {
        int idx = int(bounded_rand(rng, group.size()));
        seq.elements.push_back(idx);
        u = group[idx].u * u;
    }
    seq.recovery = group.lookup(u.adjoint());
    if (seq.recovery < 0) throw InvariantViolation("sample_sequence: recovery lookup failed");
    return seq;
}

// ---------------------------------------------------------------------------
// Backend interface
// ---------------------------------------------------------------------------

/// Mutable state of one sequence evaluation. Lives on the work item's stack,
/// so backends stay const and safe to share across threads.
struct SequenceContext {
    uint64_t stream = 0;  // per-sequence RNG stream
    uint64_t gate_counter = 0;
    double trigger_jitter = 0.0;
    bool trigger_jitter_drawn = false;
};

/// Maps gate sequences onto final density matrices. Implementations must be
/// safe to call concurrently from multiple work items; all per-sequence
/// mutability goes through the SequenceContext.
class GateBackend {
public:
    virtual ~GateBackend() = default;

    virtual void apply_clifford(int group_index, SequenceContext& ctx, DensityMatrix& rho) const = 0;

    virtual void apply_gate(const gates::GateKind& g, SequenceContext& ctx, DensityMatrix& rho) const = 0;

    /// Discrete support of the per-trigger noise (e.g. phase-jitter values).
    /// Each experimental repetition re-triggers, so the measured state is
    /// the exact average over this ensemble; a single zero entry means no
    /// trigger noise.
    virtual std::vector<double> trigger_ensemble() const { return {0.0}; }
};

/// Quantum-map backend: Cliffords are compiled to the native set and every
/// gate is applied as its noisy Liouville channel.
///
/// By default the two-qubit channels are the *calibrated* gates: the CZ
/// carries a total controlled phase of pi (the calibration absorbs the ZZ
/// phase into the drive detuning), and the iSWAP carries the balanced
/// virtual-Z corrections that move half of the ZZ phase onto each qubit
/// frame. Disable `calibrated_gates` to apply the raw gate + ZZ channels.
class SimpleModelBackend : public GateBackend {
public:
    SimpleModelBackend(gates::SimpleNoiseModel noise, NativeSet native,
                       std::optional<noise::PhaseJitterModel> jitter = std::nullopt,
                       bool calibrated_gates = true)
        : noise_(noise), native_(native), jitter_(jitter), calibrated_(calibrated_gates) {
        noise_.validate();
        if (jitter_) jitter_->validate();
    }

    const gates::SimpleNoiseModel& noise_model() const { return noise_; }
    NativeSet native_set() const { return native_; }

    void apply_clifford(int group_index, SequenceContext& ctx, DensityMatrix& rho) const override {
        const auto& el = cliff::CliffordGroup::instance()[group_index];
        const auto& gate_list =
            native_ == NativeSet::CZ ? el.decomp_cz : el.decomp_iswap;
        for (const auto& g : gate_list) apply_gate(g, ctx, rho);
    }

    void apply_gate(const gates::GateKind& g, SequenceContext& ctx, DensityMatrix& rho) const override {
        ctx.gate_counter++;
        if (!g.two_qubit() && noise_.tau_1q == 0.0) {
            // zero-duration single-qubit gates are noiseless unitaries
            ComplexMatrix u = g.unitary4();
            rho.mat = u * rho.mat * u.adjoint();
            return;
        }
        const SuperOperator& chan = channel_for(g);
        if (g.tag == gates::GateKind::Tag::ISwap && jitter_ && jitter_->sideband_hz != 0.0) {
            SuperOperator jittered =
                noise::apply_jitter_to_channel(chan, g, jitter_phase(ctx));
            rho = jittered.apply(rho);
            return;
        }
        rho = chan.apply(rho);
    }

    /// The channel of one native gate, with the calibrated-CZ total-phase
    /// compensation applied when enabled.
    SuperOperator gate_channel(const gates::GateKind& g) const { return channel_for(g); }

    std::vector<double> trigger_ensemble() const override {
        if (!jitter_ || jitter_->per_gate || jitter_->sideband_hz == 0.0) return {0.0};
        std::vector<double> phases;
        for (int n = 1; n <= jitter_->max_cycles; ++n)
            phases.push_back(jitter_->phase_for_cycles(n));
        return phases;
    }

private:
    gates::SimpleNoiseModel noise_;
    NativeSet native_;
    std::optional<noise::PhaseJitterModel> jitter_;
    bool calibrated_;
    mutable std::map<std::array<long long, 4>, SuperOperator> cache_;
    mutable std::mutex cache_mutex_;

    /// One jitter draw per trigger (sequence) by default; per-gate draws
    /// behind the model flag.
    double jitter_phase(SequenceContext& ctx) const {
        if (jitter_->per_gate) {
            auto rng = make_rng(derive_stream(ctx.stream, 0x6a697474ull, ctx.gate_counter));
            return noise::sample_phase_jitter(*jitter_, rng);
        }
        if (!ctx.trigger_jitter_drawn) {
            auto rng = make_rng(derive_stream(ctx.stream, 0x6a697474ull));
            ctx.trigger_jitter = noise::sample_phase_jitter(*jitter_, rng);
            ctx.trigger_jitter_drawn = true;
        }
        return ctx.trigger_jitter;
    }

    const SuperOperator& channel_for(const gates::GateKind& g) const {
        gates::GateKind eff = g;
        bool balance = false;
        if (calibrated_ && noise_.zeta_hz != 0.0) {
            if (g.tag == gates::GateKind::Tag::CZ) {
                // calibration absorbs the ZZ phase into the controlled phase
                double phi_zeta = 2.0 * M_PI * noise_.zeta_hz * noise_.tau_2q;
                eff = gates::GateKind::cz(g.angle - phi_zeta);
            } else if (g.tag == gates::GateKind::Tag::ISwap) {
                balance = true;
            }
        }
        auto key = eff.key();
        key[3] = calibrated_ ? 1 : 0;
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            SuperOperator chan = gates::noisy_gate_channel(eff, noise_);
            if (balance) {
                // balanced virtual-Z corrections: Z(phi_zeta/2) on each qubit
                // turns the conditional |11> phase into a symmetric residual
                double half = M_PI * noise_.zeta_hz * noise_.tau_2q;
                ComplexMatrix zz = kron(gates::virtual_z(half), gates::virtual_z(half));
                chan = chan.then(unitary_to_superop(zz));
            }
            it = cache_.emplace(key, std::move(chan)).first;
        }
        return it->second;
    }
};

/// Test oracle: ideal Cliffords followed by a global depolarizing channel of
/// known survival probability per Clifford (and optionally a different one
/// for the interleaved gate).
class DepolarizingBackend : public GateBackend {
public:
    explicit DepolarizingBackend(double survival_clifford, double survival_gate = 1.0)
        : gamma_c_(survival_clifford), gamma_g_(survival_gate) {}

    void apply_clifford(int group_index, SequenceContext&, DensityMatrix& rho) const override {
        const auto& u = cliff::CliffordGroup::instance()[group_index].u;
        rho.mat = u * rho.mat * u.adjoint();
        depolarize(rho, gamma_c_);
    }

    void apply_gate(const gates::GateKind& g, SequenceContext&, DensityMatrix& rho) const override {
        ComplexMatrix u = g.unitary4();
        rho.mat = u * rho.mat * u.adjoint();
        depolarize(rho, gamma_g_);
    }

private:
    double gamma_c_, gamma_g_;
    static void depolarize(DensityMatrix& rho, double gamma) {
        rho.mat = gamma * rho.mat + (1.0 - gamma) * ComplexMatrix::Identity(4, 4) / 4.0;
    }
};

/// Backend around a fixed two-qubit channel (e.g. extracted from the full
/// device model by process tomography); single-qubit gates are ideal.
class ChannelBackend : public GateBackend {
public:
    ChannelBackend(SuperOperator two_qubit_channel, NativeSet native)
        : chan_(std::move(two_qubit_channel)), native_(native) {}

    void apply_clifford(int group_index, SequenceContext& ctx, DensityMatrix& rho) const override {
        const auto& el = cliff::CliffordGroup::instance()[group_index];
        const auto& gate_list =
            native_ == NativeSet::CZ ? el.decomp_cz : el.decomp_iswap;
        for (const auto& g : gate_list) apply_gate(g, ctx, rho);
    }

    void apply_gate(const gates::GateKind& g, SequenceContext&, DensityMatrix& rho) const override {
        if (g.two_qubit()) {
            rho = chan_.apply(rho);
        } else {
            ComplexMatrix u = g.unitary4();
            rho.mat = u * rho.mat * u.adjoint();
        }
    }

private:
    SuperOperator chan_;
    NativeSet native_;
};

// ---------------------------------------------------------------------------
// Campaign results
// ---------------------------------------------------------------------------

struct RBResult {
    std::vector<int> lengths;
    std::vector<std::vector<double>> fidelities;  // [length][randomization]
    fit::DecayFit fit;                            // A p^m + B
    double epc = 0.0;      // (d-1)(1-p)/d
    double epg = 0.0;      // EPC / 1.5
    double epg_std_error = 0.0;

    bool interleaved = false;
    gates::GateKind interleaved_gate;
    std::vector<std::vector<double>> fidelities_interleaved;
    fit::DecayFit fit_interleaved;
    double epg_interleaved = 0.0;  // (d-1)(1 - p_int/p_ref)/d
    double epg_interleaved_std_error = 0.0;

    double mean_fidelity(size_t li, bool interleaved_data = false) const {
        const auto& f = interleaved_data ? fidelities_interleaved[li] : fidelities[li];
        double s = 0;
        for (double v : f) s += v;
        return s / double(f.size());
    }
    double std_fidelity(size_t li, bool interleaved_data = false) const {
        const auto& f = interleaved_data ? fidelities_interleaved[li] : fidelities[li];
        double mu = mean_fidelity(li, interleaved_data), s = 0;
        for (double v : f) s += (v - mu) * (v - mu);
        return f.size() > 1 ? std::sqrt(s / double(f.size() - 1)) : 0.0;
    }
};

struct PurityRBResult {
    std::vector<int> lengths;
    std::vector<std::vector<double>> purities;  // [length][randomization]
    fit::DecayFit fit;                          // A gamma^(2m) + B
    double gamma = 1.0;
    double purity_epg = 0.0;  // 3(1 - gamma^(2/3))/4
};

namespace detail {

constexpr uint64_t kSaltReference = 0x72656665u;
constexpr uint64_t kSaltInterleaved = 0x696e746cu;

/// Runs one sequence and returns the final 4x4 state. The recovery inverts
/// the ideal product including any interleaved gates.
inline DensityMatrix run_one_sequence(const GateBackend& backend, int m, uint64_t stream,
                                      const gates::GateKind* interleave) {
    const auto& group = cliff::CliffordGroup::instance();
    int interleave_index = -1;
    if (interleave) {
        interleave_index = group.lookup(interleave->unitary4());
        if (interleave_index < 0)
            throw BackendError("run_rb: interleaved gate is not a Clifford");
    }

    // same Clifford draws for every member of the trigger ensemble
    auto rng = make_rng(stream);
    std::vector<int> sequence;
    cliff::Matrix4 ideal = cliff::Matrix4::Identity();
    for (int k = 0; k < m; ++k) {
        int idx = int(bounded_rand(rng, group.size()));
        sequence.push_back(idx);
        ideal = group[idx].u * ideal;
        if (interleave) ideal = group[interleave_index].u * ideal;
    }
    int recovery = group.lookup(ideal.adjoint());
    if (recovery < 0) throw InvariantViolation("run_rb: recovery lookup failed");

    std::vector<double> ensemble = backend.trigger_ensemble();
    ComplexMatrix avg = ComplexMatrix::Zero(4, 4);
    for (double trigger : ensemble) {
        SequenceContext ctx;
        ctx.stream = stream;
        ctx.trigger_jitter = trigger;
        ctx.trigger_jitter_drawn = true;
        DensityMatrix rho = DensityMatrix::basis(4, 0);
        for (int idx : sequence) {
            backend.apply_clifford(idx, ctx, rho);
            if (interleave) backend.apply_gate(*interleave, ctx, rho);
        }
        backend.apply_clifford(recovery, ctx, rho);
        avg += rho.mat;
    }
    return DensityMatrix(ComplexMatrix(avg / double(ensemble.size())));
}

inline void fill_campaign(const GateBackend& backend, const std::vector<int>& lengths,
                          int n_random, uint64_t seed, uint64_t salt,
                          const gates::GateKind* interleave,
                          std::vector<std::vector<double>>* fidelities,
                          std::vector<std::vector<double>>* purities, int threads,
                          int shots = 0) {
    size_t total = lengths.size() * size_t(n_random);
    std::vector<double> fid(total), pur(total);
    parallel_for(total, [&](size_t item) {
        size_t li = item / n_random;
        int r = int(item % n_random);
        uint64_t stream = derive_stream(seed, uint64_t(lengths[li]), uint64_t(r), salt);
        DensityMatrix rho = run_one_sequence(backend, lengths[li], stream, interleave);
        double f = rho.mat(0, 0).real();
        if (shots > 0) {
            // binomial readout sampling, mirroring experimental error bars
            auto rng = make_rng(derive_stream(stream, 0x73686f7473ull));
            int hits = 0;
            for (int s = 0; s < shots; ++s)
                if (uniform01(rng) < f) ++hits;
            f = double(hits) / double(shots);
        }
        fid[item] = f;
        pur[item] = rho.purity();
    }, threads);
    if (fidelities) {
        fidelities->assign(lengths.size(), {});
        for (size_t li = 0; li < lengths.size(); ++li)
            (*fidelities)[li].assign(fid.begin() + li * n_random, fid.begin() + (li + 1) * n_random);
    }
    if (purities) {
        purities->assign(lengths.size(), {});
        for (size_t li = 0; li < lengths.size(); ++li)
            (*purities)[li].assign(pur.begin() + li * n_random, pur.begin() + (li + 1) * n_random);
    }
}

inline fit::DecayFit fit_mean_decay(const std::vector<int>& lengths,
                                    const std::vector<std::vector<double>>& per_length) {
    std::vector<double> m, f;
    for (size_t li = 0; li < lengths.size(); ++li) {
        double s = 0;
        for (double v : per_length[li]) s += v;
        m.push_back(double(lengths[li]));
        f.push_back(s / double(per_length[li].size()));
    }
    return fit::fit_rb_decay(m, f);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Campaigns
// ---------------------------------------------------------------------------

/// Standard (and optionally interleaved) RB. Sequence fidelity is the |00>
/// population of the final state (exact expectation value, or a binomial
/// estimate when shots > 0); the reference decay A p^m + B gives
/// EPC = (d-1)(1-p)/d and EPG = EPC/1.5; with an interleaved gate the
/// per-gate error is (d-1)(1 - p_int/p_ref)/d.
inline RBResult run_rb(const GateBackend& backend, const std::vector<int>& lengths,
                       int n_random, std::optional<gates::GateKind> interleave,
                       uint64_t rng_seed, int threads = 0, int shots = 0) {
    if (lengths.empty() || n_random < 1)
        throw InsufficientData("run_rb: need at least one length and one randomization");
    RBResult res;
    res.lengths = lengths;
    detail::fill_campaign(backend, lengths, n_random, rng_seed, detail::kSaltReference,
                          nullptr, &res.fidelities, nullptr, threads, shots);
    constexpr double d = 4.0;
    // fewer than three lengths still yields fidelity data, just no decay fit
    bool fit_possible = lengths.size() >= 3;
    if (fit_possible) {
        res.fit = detail::fit_mean_decay(lengths, res.fidelities);
        res.epc = (d - 1.0) / d * (1.0 - res.fit.p);
        res.epg = res.epc / 1.5;
        res.epg_std_error = (d - 1.0) / d / 1.5 * res.fit.p_std_error;
    }

    if (interleave) {
        res.interleaved = true;
        res.interleaved_gate = *interleave;
        detail::fill_campaign(backend, lengths, n_random, rng_seed, detail::kSaltInterleaved,
                              &*interleave, &res.fidelities_interleaved, nullptr, threads, shots);
        if (fit_possible) {
            res.fit_interleaved = detail::fit_mean_decay(lengths, res.fidelities_interleaved);
            double pr = res.fit.p, pi = res.fit_interleaved.p;
            res.epg_interleaved = (d - 1.0) / d * (1.0 - pi / pr);
            double spr = res.fit.p_std_error, spi = res.fit_interleaved.p_std_error;
            res.epg_interleaved_std_error =
                (d - 1.0) / d * std::sqrt((spi / pr) * (spi / pr) +
                                          (pi * spr / (pr * pr)) * (pi * spr / (pr * pr)));
        }
    }
    return res;
}

/// Purity RB: decay of tr(rho^2) over reference sequences, fitted to
/// A gamma^(2m) + B; the incoherent error per gate is 3(1-gamma^(2/3))/4
/// (the 2/3 exponent is the reciprocal of 1.5 entangling gates/Clifford).
inline PurityRBResult run_purity_rb(const GateBackend& backend, const std::vector<int>& lengths,
                                    int n_random, uint64_t rng_seed, int threads = 0) {
    if (lengths.empty() || n_random < 1)
        throw InsufficientData("run_purity_rb: need at least one length and one randomization");
    PurityRBResult res;
    res.lengths = lengths;
    detail::fill_campaign(backend, lengths, n_random, rng_seed, detail::kSaltReference,
                          nullptr, nullptr, &res.purities, threads);
    std::vector<double> m, p;
    for (size_t li = 0; li < lengths.size(); ++li) {
        double s = 0;
        for (double v : res.purities[li]) s += v;
        m.push_back(double(lengths[li]));
        p.push_back(s / double(res.purities[li].size()));
    }
    res.fit = fit::fit_purity_decay(m, p);
    res.gamma = res.fit.p;
    res.purity_epg = 0.75 * (1.0 - std::pow(res.gamma, 2.0 / 3.0));
    return res;
}

// ---------------------------------------------------------------------------
// Fidelity histograms
// ---------------------------------------------------------------------------

struct FidelityHistogram {
    int m = 0;
    std::vector<double> bin_edges;
    std::vector<int> counts;
    double mean = 0.0;
    double std_dev = 0.0;
    fit::GammaFit gamma_fit;  // method-of-moments fit on (1 - F)
};

/// Histogram of the per-randomization sequence fidelities at length m with a
/// Gamma fit of the error distribution (1 - F).
inline FidelityHistogram fidelity_histogram(const RBResult& result, int m, int bins = 20,
                                            bool use_interleaved = false) {
    size_t li = 0;
    bool found = false;
    for (size_t i = 0; i < result.lengths.size(); ++i)
        if (result.lengths[i] == m) {
            li = i;
            found = true;
        }
    if (!found) throw InsufficientData("fidelity_histogram: length not in result");
    const auto& f = use_interleaved ? result.fidelities_interleaved[li] : result.fidelities[li];
    if (f.size() < 50)
        throw InsufficientData("fidelity_histogram: need >= 50 randomizations");

    FidelityHistogram h;
    h.m = m;
    double lo = *std::min_element(f.begin(), f.end());
    double hi = *std::max_element(f.begin(), f.end());
    if (hi - lo < 1e-12) {
        lo -= 5e-13;
        hi += 5e-13;
    }
    double w = (hi - lo) / bins;
    h.bin_edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) h.bin_edges[b] = lo + b * w;
    h.counts.assign(bins, 0);
    for (double v : f) {
        int b = std::min(bins - 1, int((v - lo) / w));
        h.counts[std::max(0, b)]++;
    }
    for (double v : f) h.mean += v;
    h.mean /= double(f.size());
    for (double v : f) h.std_dev += (v - h.mean) * (v - h.mean);
    h.std_dev = std::sqrt(h.std_dev / double(f.size() - 1));

    std::vector<double> err;
    err.reserve(f.size());
    for (double v : f) err.push_back(std::max(0.0, 1.0 - v));
    h.gamma_fit = fit::gamma_fit_moments(err);
    return h;
}

// ---------------------------------------------------------------------------
// Convenience entry point for the quantum-map emulation
// ---------------------------------------------------------------------------

enum class TwoQubitGate { CZ, ISwap };

/// Interleaved RB with the simple two-level model. The CZ emulation uses the
/// calibrated gate (total controlled phase retuned to pi, absorbing the ZZ
/// shift); the iSWAP emulation applies the raw gate + ZZ channel, whose
/// conditional phase cannot be removed by retuning the exchange drive.
inline RBResult emulate_rb_simple(const gates::SimpleNoiseModel& noise, TwoQubitGate gate,
                                  const std::vector<int>& lengths, int n_random,
                                  uint64_t rng_seed, int threads = 0,
                                  std::optional<noise::PhaseJitterModel> jitter = std::nullopt,
                                  int shots = 0) {
    NativeSet native = gate == TwoQubitGate::CZ ? NativeSet::CZ : NativeSet::ISwap;
    SimpleModelBackend backend(noise, native, jitter, gate == TwoQubitGate::CZ);
    gates::GateKind g = gate == TwoQubitGate::CZ ? gates::GateKind::cz(M_PI)
                                                 : gates::GateKind::iswap(M_PI, 0.0);
    return run_rb(backend, lengths, n_random, g, rng_seed, threads, shots);
}

}  // namespace qgate::rb
