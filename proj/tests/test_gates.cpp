#include "doctest.h"

#include "oracles.hpp"
#include "qgate/gates.hpp"

using namespace qgate;
using namespace qgate::gates;

TEST_CASE("u_cz") {
    CHECK(oracle::approx_equal(u_cz(0.0), ComplexMatrix::Identity(4, 4), 1e-15));

    ComplexMatrix cz = u_cz(M_PI);
    ComplexMatrix expected = ComplexMatrix::Identity(4, 4);
    expected(3, 3) = -1.0;
    CHECK(oracle::approx_equal(cz, expected, 1e-15));

    CHECK(oracle::approx_equal(u_cz(0.7) * u_cz(-0.7), ComplexMatrix::Identity(4, 4), 1e-15));
}

TEST_CASE("u_iswap") {
    CHECK(oracle::approx_equal(u_iswap(0.0, 0.3), ComplexMatrix::Identity(4, 4), 1e-15));

    SUBCASE("theta = pi swaps with factor i") {
        ComplexMatrix u = u_iswap(M_PI, 0.0);
        ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
        expected(0, 0) = expected(3, 3) = 1.0;
        expected(1, 2) = expected(2, 1) = kI;
        CHECK(oracle::approx_equal(u, expected, 1e-15));
        CHECK(is_unitary(u, 1e-12));
    }

    SUBCASE("rotation additivity in the subspace") {
        ComplexMatrix half = u_iswap(M_PI / 2, 0.0);
        CHECK(oracle::approx_equal(half * half, u_iswap(M_PI, 0.0), 1e-14));
    }

    SUBCASE("unitarity for generic angles") {
        CHECK(is_unitary(u_iswap(1.234, -0.777), 1e-12));
    }
}

TEST_CASE("virtual_z") {
    CHECK(oracle::approx_equal(virtual_z(0.0), ComplexMatrix::Identity(2, 2), 1e-15));

    SUBCASE("2 pi gives -identity, trivial as a channel") {
        CHECK(oracle::approx_equal(virtual_z(2 * M_PI), ComplexMatrix(-ComplexMatrix::Identity(2, 2)),
                                   1e-14));
        SuperOperator s = unitary_to_superop(virtual_z(2 * M_PI));
        CHECK(oracle::approx_equal(s.mat, ComplexMatrix::Identity(4, 4), 1e-14));
    }

    SUBCASE("phases add") {
        CHECK(oracle::approx_equal(virtual_z(0.4) * virtual_z(1.1), virtual_z(1.5), 1e-14));
    }
}

TEST_CASE("zz_phase_unitary") {
    CHECK(oracle::approx_equal(zz_phase_unitary(0.0, 1e-6), ComplexMatrix::Identity(4, 4), 1e-15));

    SUBCASE("paper parameters: -200 kHz for 200 ns put +0.2513 rad on |11>") {
        ComplexMatrix u = zz_phase_unitary(-200e3, 200e-9);
        CHECK(std::arg(u(3, 3)) == doctest::Approx(0.2513).epsilon(1e-3));
    }

    SUBCASE("commutes with u_cz and accumulates over duration") {
        ComplexMatrix a = zz_phase_unitary(-2e5, 1e-7) * u_cz(0.9);
        ComplexMatrix b = u_cz(0.9) * zz_phase_unitary(-2e5, 1e-7);
        CHECK(oracle::approx_equal(a, b, 1e-15));
        CHECK(oracle::approx_equal(
            zz_phase_unitary(-2e5, 1e-7) * zz_phase_unitary(-2e5, 3e-7),
            zz_phase_unitary(-2e5, 4e-7), 1e-14));
    }
}

TEST_CASE("sq_rot") {
    // axis 0 is X, axis pi/2 is Y
    ComplexMatrix x90 = sq_rot(0.0, M_PI / 2);
    ComplexMatrix expected(2, 2);
    expected << 1, -kI, -kI, 1;
    expected /= std::sqrt(2.0);
    CHECK(oracle::approx_equal(x90, expected, 1e-14));
    CHECK(is_unitary(sq_rot(1.1, 2.2), 1e-12));
    CHECK(oracle::approx_equal(sq_rot(0.0, M_PI / 2) * sq_rot(0.0, M_PI / 2),
                               sq_rot(0.0, M_PI), 1e-14));
}

TEST_CASE("noisy_gate_channel") {
    SimpleNoiseModel clean;  // infinite T1/T2*, zero ZZ

    SUBCASE("no noise reduces to the ideal unitary channel") {
        SuperOperator chan = noisy_gate_channel(GateKind::iswap(M_PI, 0.0), clean);
        SuperOperator ideal = unitary_to_superop(u_iswap(M_PI, 0.0));
        CHECK(oracle::approx_equal(chan.mat, ideal.mat, 1e-12));
    }

    SUBCASE("identity gate T1 decay factor on q1") {
        SimpleNoiseModel noise;
        noise.t1 = {70e-6, INFINITY};
        noise.t2_star = {2 * 70e-6, INFINITY};  // pure T1-limited
        noise.tau_2q = 200e-9;
        // a CZ(0) is an identity two-qubit gate that still idles for tau_2q
        SuperOperator chan = noisy_gate_channel(GateKind::cz(0.0), noise);
        DensityMatrix rho = DensityMatrix::basis(4, 2);  // |10>: q1 excited
        DensityMatrix out = chan.apply(rho);
        CHECK(out.mat(2, 2).real() == doctest::Approx(std::exp(-200e-9 / 70e-6)).epsilon(1e-9));
        CHECK(out.mat(2, 2).real() == doctest::Approx(0.99714694).epsilon(1e-6));
    }

    SUBCASE("iSWAP with ZZ only reproduces the 0.0117 process infidelity") {
        SimpleNoiseModel noise;
        noise.zeta_hz = -200e3;
        noise.tau_2q = 200e-9;
        SuperOperator chan = noisy_gate_channel(GateKind::iswap(M_PI, 0.0), noise);
        ProcessMatrix chi = superop_to_chi(chan);
        ProcessMatrix chi0 = superop_to_chi(unitary_to_superop(u_iswap(M_PI, 0.0)));
        double infid = 1.0 - process_fidelity(chi, chi0);
        CHECK(infid == doctest::Approx(0.0117).epsilon(0.10));
        // exact value of the phase-error formula 1 - |3 + e^{i phi}|^2/16
        double phi = 2 * M_PI * 200e3 * 200e-9;
        double exact = 1.0 - ((3 + std::cos(phi)) * (3 + std::cos(phi)) +
                              std::sin(phi) * std::sin(phi)) / 16.0;
        CHECK(infid == doctest::Approx(exact).epsilon(1e-9));
    }

    SUBCASE("channel composition in Liouville form matches state-level application") {
        auto g = oracle::rng(23);
        SimpleNoiseModel noise;
        noise.t1 = {70e-6, 23e-6};
        noise.t2_star = {50e-6, 27e-6};
        noise.zeta_hz = -200e3;
        SuperOperator a = noisy_gate_channel(GateKind::iswap(M_PI, 0.0), noise);
        SuperOperator b = noisy_gate_channel(GateKind::cz(M_PI), noise);
        SuperOperator ab = a.then(b);
        for (int rep = 0; rep < 4; ++rep) {
            DensityMatrix rho = oracle::random_density(4, g);
            DensityMatrix seq = b.apply(a.apply(rho));
            DensityMatrix once = ab.apply(rho);
            CHECK(oracle::approx_equal(seq.mat, once.mat, 1e-10));
        }
    }

    SUBCASE("trace preservation and positivity with full noise") {
        auto g = oracle::rng(29);
        SimpleNoiseModel noise;
        noise.t1 = {70e-6, 23e-6};
        noise.t2_star = {50e-6, 27e-6};
        noise.zeta_hz = -464e3;
        SuperOperator chan = noisy_gate_channel(GateKind::iswap(M_PI, 0.3), noise);
        DensityMatrix rho = oracle::random_density(4, g);
        DensityMatrix out = chan.apply(rho);
        CHECK_NOTHROW(out.validate());
    }

    SUBCASE("invalid noise model rejected") {
        SimpleNoiseModel noise;
        noise.t1 = {10e-6, 10e-6};
        noise.t2_star = {25e-6, 10e-6};  // T2* > 2 T1 on q1
        CHECK_THROWS_AS(noisy_gate_channel(GateKind::cz(M_PI), noise), InvalidNoise);
    }
}

TEST_CASE("gate kind canonicalization") {
    GateKind g = GateKind::cz(3 * M_PI);
    CHECK(g.angle == doctest::Approx(M_PI));
    GateKind r = GateKind::rot(1, 2 * M_PI + 0.3, -0.5);
    CHECK(r.axis == doctest::Approx(0.3));
    CHECK(r.angle == doctest::Approx(-0.5));
}
