#include "doctest.h"

#include <set>

#include "oracles.hpp"
#include "qgate/calibration.hpp"
#include "qgate/noise.hpp"
#include "qgate/rb.hpp"

using namespace qgate;
using namespace qgate::noise;

TEST_CASE("sample_phase_jitter") {
    SUBCASE("one clock cycle at 200 MHz sideband is 1.047 rad") {
        PhaseJitterModel m;
        m.sideband_hz = 200e6;
        CHECK(m.phase_for_cycles(1) == doctest::Approx(1.0468).epsilon(1e-3));
    }

    SUBCASE("zero sideband frequency gives zero jitter") {
        PhaseJitterModel m;
        m.sideband_hz = 0.0;
        auto rng = make_rng(7);
        for (int k = 0; k < 10; ++k) CHECK(sample_phase_jitter(m, rng) == 0.0);
    }

    SUBCASE("one cycle at 5 MHz is 26 mrad") {
        PhaseJitterModel m;
        m.sideband_hz = 5e6;
        CHECK(m.phase_for_cycles(1) == doctest::Approx(0.0262).epsilon(2e-3));
    }

    SUBCASE("support has exactly max_cycles points") {
        PhaseJitterModel m;
        m.sideband_hz = 200e6;
        m.max_cycles = 5;
        auto rng = make_rng(3);
        std::set<long> seen;
        for (int k = 0; k < 10000; ++k)
            seen.insert(llround(sample_phase_jitter(m, rng) * 1e9));
        CHECK(seen.size() == 5);
    }

    SUBCASE("invalid models rejected") {
        PhaseJitterModel m;
        m.max_cycles = 0;
        auto rng = make_rng(1);
        CHECK_THROWS_AS(sample_phase_jitter(m, rng), InvalidNoise);
    }
}

TEST_CASE("effective_t2") {
    SUBCASE("constant when the quadratic term vanishes") {
        AmplitudeDephasingModel m;
        m.c0 = 1.0 / (2 * M_PI * 50e-6);
        CHECK(effective_t2(m, 0.0) == doctest::Approx(50e-6));
        CHECK(effective_t2(m, 5e6) == doctest::Approx(50e-6));
    }

    SUBCASE("anchored coefficients reproduce the driven T2") {
        auto m = amplitude_dephasing_from_anchors(50e-6, 5e6, 4e-6);
        CHECK(effective_t2(m, 0.0) == doctest::Approx(50e-6).epsilon(1e-9));
        CHECK(effective_t2(m, 5e6) == doctest::Approx(4e-6).epsilon(1e-9));
    }

    SUBCASE("monotone non-increasing for positive quadratic coefficient") {
        auto m = amplitude_dephasing_from_anchors(50e-6, 5e6, 4e-6);
        double prev = INFINITY;
        for (double rabi = 0; rabi <= 6e6; rabi += 0.5e6) {
            double t2 = effective_t2(m, rabi);
            CHECK(t2 <= prev + 1e-15);
            prev = t2;
        }
        // doubling the drive quadruples the quadratic contribution
        double s1 = m.sigma_df(2e6) - m.c0;
        double s2 = m.sigma_df(4e6) - m.c0;
        CHECK(s2 == doctest::Approx(4 * s1).epsilon(1e-12));
    }

    SUBCASE("negative sigma rejected") {
        AmplitudeDephasingModel m;
        m.c0 = -1.0;
        CHECK_THROWS_AS(effective_t2(m, 0.0), NegativeSigma);
        CHECK_THROWS_AS(effective_t2(m, -1.0), InvalidNoise);
    }
}

TEST_CASE("apply_jitter_to_channel") {
    gates::SimpleNoiseModel noise;
    noise.t1 = {70e-6, 23e-6};
    noise.t2_star = {50e-6, 27e-6};
    noise.zeta_hz = -200e3;
    SuperOperator iswap_chan =
        gates::noisy_gate_channel(gates::GateKind::iswap(M_PI, 0.0), noise);
    SuperOperator cz_chan = gates::noisy_gate_channel(gates::GateKind::cz(M_PI), noise);

    SUBCASE("zero jitter is the identity operation") {
        SuperOperator out = apply_jitter_to_channel(iswap_chan, gates::GateKind::iswap(M_PI, 0.0),
                                                    0.0);
        CHECK(oracle::approx_equal(out.mat, iswap_chan.mat, 1e-14));
    }

    SUBCASE("CZ channels pass through unchanged") {
        SuperOperator out = apply_jitter_to_channel(cz_chan, gates::GateKind::cz(M_PI), 1.0);
        CHECK(oracle::approx_equal(out.mat, cz_chan.mat, 1e-14));
    }

    SUBCASE("conjugation equals rebuilding at the shifted drive phase") {
        double dphi = 0.37;
        SuperOperator shifted = apply_jitter_to_channel(iswap_chan,
                                                        gates::GateKind::iswap(M_PI, 0.0), dphi);
        SuperOperator rebuilt =
            gates::noisy_gate_channel(gates::GateKind::iswap(M_PI, dphi), noise);
        CHECK(oracle::approx_equal(shifted.mat, rebuilt.mat, 1e-12));
    }

    SUBCASE("pi phase flip keeps populations, flips transfer phase") {
        SuperOperator flipped = apply_jitter_to_channel(iswap_chan,
                                                        gates::GateKind::iswap(M_PI, 0.0), M_PI);
        DensityMatrix rho = DensityMatrix::basis(4, 1);  // |01>
        DensityMatrix a = iswap_chan.apply(rho);
        DensityMatrix b = flipped.apply(rho);
        CHECK(a.mat(2, 2).real() == doctest::Approx(b.mat(2, 2).real()).epsilon(1e-12));

        ComplexVector plus(4);
        plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0, 0;  // |00> + |01>
        DensityMatrix sup = DensityMatrix::pure(plus);
        DensityMatrix ua = iswap_chan.apply(sup);
        DensityMatrix ub = flipped.apply(sup);
        // the |00><10| coherence changes sign under the pi drive-phase flip
        CHECK(std::abs(ua.mat(0, 2) + ub.mat(0, 2)) < 1e-12);
        CHECK(std::abs(ua.mat(0, 2)) > 0.1);
    }
}

TEST_CASE("jittered rb raises the iswap error but not the cz error [slow]") {
    gates::SimpleNoiseModel noise;
    noise.t1 = {70e-6, 23e-6};
    noise.t2_star = {50e-6, 27e-6};
    noise.tau_2q = 200e-9;

    PhaseJitterModel jitter;
    jitter.sideband_hz = 10e6;  // 52-209 mrad phase kicks
    jitter.max_cycles = 4;

    std::vector<int> lengths{1, 2, 4, 8, 16, 32};
    int n_random = 100;

    rb::SimpleModelBackend is_clean(noise, rb::NativeSet::ISwap, std::nullopt, false);
    rb::SimpleModelBackend is_jit(noise, rb::NativeSet::ISwap, jitter, false);
    rb::RBResult r_clean = rb::run_rb(is_clean, lengths, n_random,
                                      gates::GateKind::iswap(M_PI, 0.0), 42);
    rb::RBResult r_jit = rb::run_rb(is_jit, lengths, n_random,
                                    gates::GateKind::iswap(M_PI, 0.0), 42);
    CHECK(r_jit.epg_interleaved > 1.05 * r_clean.epg_interleaved);

    rb::SimpleModelBackend cz_clean(noise, rb::NativeSet::CZ);
    rb::SimpleModelBackend cz_jit(noise, rb::NativeSet::CZ, jitter);
    rb::RBResult c_clean = rb::run_rb(cz_clean, lengths, n_random, gates::GateKind::cz(M_PI), 42);
    rb::RBResult c_jit = rb::run_rb(cz_jit, lengths, n_random, gates::GateKind::cz(M_PI), 42);
    CHECK(c_jit.epg_interleaved ==
          doctest::Approx(c_clean.epg_interleaved).epsilon(1e-9));  // CZ insensitive
}

TEST_CASE("spurious tone validation") {
    SpuriousToneModel m;
    m.tones.push_back({50e6, 0.1, 0.0});
    CHECK_NOTHROW(m.validate());
    m.tones.push_back({100e6, -0.2, 0.0});
    CHECK_THROWS_AS(m.validate(), InvalidNoise);
}

TEST_CASE("spurious tone near the cz resonance leaks the iswap gate [slow]") {
    using namespace qgate::device;
    DeviceModel m = paper_device();
    m.g12_hz = -5.4e6;
    auto lv = dressed_levels(m);

    // iSWAP pulse at the dressed difference frequency
    FluxPulse pulse;
    pulse.amplitude = 0.08;
    pulse.frequency_hz = lv.f_delta_hz();
    pulse.flank_s = 5e-9;
    pulse.plateau_s = 150e-9;

    dynamics::EvolveOptions opt;
    opt.decoherence = false;

    ComplexVector k11 = ComplexVector::Zero(27);
    k11(12) = 1.0;  // |110>
    auto baseline = dynamics::evolve(m, pulse, DensityMatrix::pure(k11), opt);

    SUBCASE("empty and zero-amplitude tone lists leave the waveform unchanged") {
        SpuriousToneModel none;
        device::FluxPulse same = add_spurious_tones(pulse, none);
        none.tones.push_back({77e6, 0.0, 0.0});
        device::FluxPulse same2 = add_spurious_tones(pulse, none);
        for (double t : {1e-9, 40e-9, 100e-9}) {
            CHECK(device::flux_waveform(same, m.tc, t) ==
                  doctest::Approx(device::flux_waveform(pulse, m.tc, t)).epsilon(1e-15));
            CHECK(device::flux_waveform(same2, m.tc, t) ==
                  doctest::Approx(device::flux_waveform(pulse, m.tc, t)).epsilon(1e-15));
        }
    }

    SUBCASE("a tone at the |11>-|20> transition drives leakage") {
        SpuriousToneModel tones;
        tones.tones.push_back({lv.f_alpha_hz(), 1.0, 0.0});
        device::FluxPulse composite = add_spurious_tones(pulse, tones);
        auto with_tone = dynamics::evolve(m, composite, DensityMatrix::pure(k11), opt);
        CHECK(with_tone.leakage > 10.0 * std::max(baseline.leakage, 1e-6));
    }
}
