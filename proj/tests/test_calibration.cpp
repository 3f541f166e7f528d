#include "doctest.h"

#include "oracles.hpp"
#include "qgate/calibration.hpp"

using namespace qgate;
using namespace qgate::cal;

namespace {

gates::SimpleNoiseModel noiseless() { return gates::SimpleNoiseModel{}; }

gates::SimpleNoiseModel zz_only(double zeta_hz, double tau = 200e-9) {
    gates::SimpleNoiseModel n;
    n.zeta_hz = zeta_hz;
    n.tau_2q = tau;
    return n;
}

/// Synthetic two-level chevron from the Rabi formula.
ChevronMap synthetic_chevron(double omega_hz, double center_hz, int n_det, double span_hz,
                             int n_dur, double t_max) {
    ChevronMap map;
    map.center_hz = center_hz;
    for (int i = 0; i < n_det; ++i)
        map.detunings_hz.push_back(-span_hz / 2 + span_hz * i / (n_det - 1));
    for (int j = 1; j <= n_dur; ++j) map.durations_s.push_back(t_max * j / n_dur);
    for (int i = 0; i < n_det; ++i) {
        std::vector<double> row;
        for (double t : map.durations_s)
            row.push_back(oracle::rabi_transfer(2 * M_PI * omega_hz,
                                                2 * M_PI * map.detunings_hz[i], t));
        map.population.push_back(row);
    }
    return map;
}

}  // namespace

TEST_CASE("measure_controlled_phase on ideal channels") {
    SUBCASE("u_cz(pi) gives pi") {
        SuperOperator chan = unitary_to_superop(gates::u_cz(M_PI));
        CHECK(std::abs(measure_controlled_phase_channel(chan) - M_PI) < 1e-6);
    }

    SUBCASE("u_cz(1.0) gives 1.0") {
        SuperOperator chan = unitary_to_superop(gates::u_cz(1.0));
        CHECK(measure_controlled_phase_channel(chan) == doctest::Approx(1.0).epsilon(1e-6));
    }

    SUBCASE("grid of phases in (-pi, pi]") {
        for (int k = 1; k <= 20; ++k) {
            double phi = -M_PI + 2 * M_PI * k / 20.0;
            SuperOperator chan = unitary_to_superop(gates::u_cz(phi));
            CHECK(std::abs(wrap_angle(measure_controlled_phase_channel(chan) - phi)) < 1e-6);
        }
    }

    SUBCASE("insensitive to single-qubit Z phases") {
        ComplexMatrix u = kron(gates::virtual_z(0.7), gates::virtual_z(-0.3)) * gates::u_cz(2.0);
        SuperOperator chan = unitary_to_superop(u);
        CHECK(measure_controlled_phase_channel(chan) == doctest::Approx(2.0).epsilon(1e-6));
    }
}

TEST_CASE("calibrate_sq_phases_cz") {
    SUBCASE("ideal CZ needs no compensation") {
        auto [p10, p01] = calibrate_sq_phases_cz(unitary_to_superop(gates::u_cz(M_PI)));
        CHECK(std::abs(p10) < 1e-9);
        CHECK(std::abs(p01) < 1e-9);
    }

    SUBCASE("injected Z rotation is recovered as its negative") {
        ComplexMatrix u = gates::embed_q1(gates::virtual_z(0.3)) * gates::u_cz(M_PI);
        auto [p10, p01] = calibrate_sq_phases_cz(unitary_to_superop(u));
        CHECK(p10 == doctest::Approx(-0.3).epsilon(1e-3 / 0.3));
        CHECK(std::abs(p01) < 1e-9);
    }

    SUBCASE("sequence returns the qubit at the optimum") {
        ComplexMatrix u = kron(gates::virtual_z(0.4), gates::virtual_z(-0.9)) * gates::u_cz(M_PI);
        SuperOperator chan = unitary_to_superop(u);
        auto [p10, p01] = calibrate_sq_phases_cz(chan);
        DensityMatrix rho = circuit::ground();
        circuit::apply_q1(rho, gates::sq_rot(0.0, M_PI / 2));
        rho = chan.apply(rho);
        circuit::apply_q1(rho, gates::virtual_z(p10));
        rho = chan.apply(rho);
        circuit::apply_q1(rho, gates::virtual_z(p10));
        circuit::apply_q1(rho, gates::sq_rot(0.0, M_PI / 2));
        CHECK(circuit::population_q1_excited(rho) > 0.99);
    }
}

TEST_CASE("phase vs detuning model and fit") {
    SUBCASE("zero detuning, zero ZZ gives exactly pi") {
        CHECK(phase_vs_detuning_model(0.0, 1.45e6, 0.0) == doctest::Approx(M_PI));
    }

    SUBCASE("asymptotes: 0 at large negative, 2 pi at large positive detuning") {
        CHECK(phase_vs_detuning_model(-1e9, 1.45e6, 0.0) < 1e-2);
        CHECK(phase_vs_detuning_model(1e9, 1.45e6, 0.0) > 2 * M_PI - 1e-2);
    }

    SUBCASE("paper parameters recovered within 1 percent") {
        double omega = 1.450e6, zeta = -355e3;
        std::vector<double> deltas, phis;
        for (int i = 0; i < 17; ++i) {
            double d = -2.5e6 + 5e6 * i / 16.0;
            deltas.push_back(d);
            phis.push_back(wrap_angle(phase_vs_detuning_model(d, omega, zeta)));
        }
        auto fit = fit_phase_vs_detuning(deltas, phis);
        CHECK(fit.omega_hz == doctest::Approx(omega).epsilon(0.01));
        CHECK(fit.zeta_hz == doctest::Approx(zeta).epsilon(0.01));
    }

    SUBCASE("input requirements") {
        std::vector<double> d{1e5, 2e5, 3e5, 4e5, 5e5, 6e5, 7e5, 8e5};
        std::vector<double> p(8, 1.0);
        CHECK_THROWS_AS(fit_phase_vs_detuning(d, p), InsufficientData);  // one sign only
        std::vector<double> d2{-1e5, 1e5};
        std::vector<double> p2{1.0, 1.0};
        CHECK_THROWS_AS(fit_phase_vs_detuning(d2, p2), InsufficientData);
    }
}

TEST_CASE("find_gate_length on synthetic chevrons") {
    SUBCASE("paper drive strength gives tau_pi of 103 ns") {
        // Omega/2pi = 4.85 MHz -> full transfer at 1/(2 Omega) = 103 ns
        auto map = synthetic_chevron(4.85e6, 1.0921e9, 11, 10e6, 120, 240e-9);
        auto gl = find_gate_length(map, GateTarget::FullTransfer);
        CHECK(gl.tau_s == doctest::Approx(103e-9).epsilon(0.02));
        CHECK(gl.frequency_hz == doctest::Approx(1.0921e9).epsilon(1e-9));
    }

    SUBCASE("full return doubles the transfer time") {
        auto map = synthetic_chevron(4.85e6, 1.4e9, 11, 10e6, 240, 480e-9);
        auto gl = find_gate_length(map, GateTarget::FullReturn);
        CHECK(gl.tau_s == doctest::Approx(206e-9).epsilon(0.02));
    }

    SUBCASE("doubling the drive roughly halves tau_pi") {
        auto a = find_gate_length(synthetic_chevron(2e6, 1e9, 9, 6e6, 200, 500e-9),
                                  GateTarget::FullTransfer);
        auto b = find_gate_length(synthetic_chevron(4e6, 1e9, 9, 6e6, 200, 500e-9),
                                  GateTarget::FullTransfer);
        CHECK(a.tau_s / b.tau_s == doctest::Approx(2.0).epsilon(0.03));
    }

    SUBCASE("constant map raises NoOscillationFound") {
        ChevronMap flat;
        flat.center_hz = 1e9;
        flat.detunings_hz = {-1e6, 0.0, 1e6};
        for (int j = 1; j <= 30; ++j) flat.durations_s.push_back(j * 1e-8);
        flat.population.assign(3, std::vector<double>(30, 0.03));
        CHECK_THROWS_AS(find_gate_length(flat, GateTarget::FullTransfer), NoOscillationFound);
    }

    SUBCASE("two-level population conservation oracle") {
        // transfer + return = 1 for the loss-free two-level model
        for (double t : {10e-9, 50e-9, 120e-9}) {
            double pt = oracle::rabi_transfer(2 * M_PI * 3e6, 2 * M_PI * 1e6, t);
            CHECK(pt >= 0.0);
            CHECK(pt <= 1.0);
        }
    }

    SUBCASE("off-resonant maximum matches the Rabi formula") {
        double omega = 3e6, delta = 2e6;
        auto map = synthetic_chevron(omega, 1e9, 2, 2 * delta, 400, 400e-9);
        // row 0 sits at detuning -2 MHz
        double max_pop = *std::max_element(map.population[0].begin(), map.population[0].end());
        CHECK(max_pop == doctest::Approx(omega * omega / (omega * omega + delta * delta))
                             .epsilon(1e-3));
    }
}

TEST_CASE("calibrate_iswap_core with the quantum-map source") {
    SUBCASE("injected ZZ phase recovered") {
        double zeta = -464e3, tau = 103e-9;
        SimpleISwapSource source(zz_only(zeta, tau));
        auto c = calibrate_iswap_core(source);
        double expected = 2 * M_PI * zeta * tau;
        CHECK(std::abs(c.phi_zeta - expected) < 1e-3);
        CHECK(c.zeta_total_hz == doctest::Approx(zeta).epsilon(1e-3));
    }

    SUBCASE("paper conversion: phi_zeta -0.299 rad at 103 ns is -464 kHz") {
        double phi = -0.299;
        double zeta = phi / (2 * M_PI * 103e-9);
        CHECK(zeta == doctest::Approx(-464e3).epsilon(0.01));
    }

    SUBCASE("drive-phase offset recovered without ZZ (fallback fringe)") {
        SimpleISwapSource source(noiseless(), 0.7);
        auto c = calibrate_iswap_core(source);
        CHECK(std::abs(wrap_angle(c.drive_phase_offset - 0.7)) < 1e-3);
    }

    SUBCASE("drive-phase offset recovered with ZZ present") {
        SimpleISwapSource source(zz_only(-464e3, 103e-9), 0.35);
        auto c = calibrate_iswap_core(source);
        CHECK(std::abs(wrap_angle(c.drive_phase_offset - 0.35)) < 2e-2);
    }

    SUBCASE("balanced compensation absorbs half the ZZ phase") {
        double zeta = -400e3, tau = 150e-9;
        SimpleISwapSource source(zz_only(zeta, tau));
        auto c = calibrate_iswap_core(source);
        double phi_zeta = 2 * M_PI * zeta * tau;
        CHECK(c.phi10 == doctest::Approx(phi_zeta / 2).epsilon(1e-3));
        CHECK(c.phi01 == doctest::Approx(phi_zeta / 2).epsilon(1e-3));
    }

    SUBCASE("injected single-qubit phases are absorbed end to end") {
        // a full exchange swaps the frames, so the echo resolves the
        // swap-symmetric phase combination; the antisymmetric part is
        // absorbed into the drive-phase offset
        SimpleISwapSource source(noiseless(), 0.3, 0.25, -0.4);
        auto c = calibrate_iswap_core(source);
        CHECK(c.phi10 == doctest::Approx(c.phi01).epsilon(1e-9));
        CHECK(std::abs(c.phi10) == doctest::Approx(0.075).epsilon(1e-3));

        SuperOperator chan = source.channel(-c.drive_phase_offset);
        ComplexMatrix corr = kron(gates::virtual_z(c.phi10), gates::virtual_z(c.phi01));
        SuperOperator calibrated = chan.then(unitary_to_superop(corr));
        double f = process_fidelity(superop_to_chi(calibrated),
                                    superop_to_chi(unitary_to_superop(gates::u_iswap(M_PI, 0.0))));
        CHECK(f > 1.0 - 1e-6);
    }
}

TEST_CASE("measure_static_zz with the quantum-map idle") {
    SUBCASE("injected -200 kHz recovered within 1 kHz") {
        gates::SimpleNoiseModel n;
        n.t1 = {70e-6, 23e-6};
        n.t2_star = {50e-6, 27e-6};
        n.zeta_hz = -200e3;
        SimpleIdleSource idle(n);
        auto r = measure_static_zz(idle, 20e-6);
        CHECK(std::abs(r.zeta_hz - (-200e3)) < 1e3);
    }

    SUBCASE("zero ZZ gives equal frequencies") {
        gates::SimpleNoiseModel n;
        n.t1 = {70e-6, 23e-6};
        n.t2_star = {50e-6, 27e-6};
        SimpleIdleSource idle(n);
        auto r = measure_static_zz(idle, 20e-6);
        CHECK(std::abs(r.zeta_hz) < std::max(3 * r.std_error_hz, 100.0));
    }
}

TEST_CASE("measure_total_zz_vs_drive") {
    SUBCASE("synthetic quadratic recovered within 1 percent") {
        // zeta(Omega) = c0 + c2 Omega^2 with Omega = 1/(2 tau)
        double c0 = -202e3, c2 = -8e3 / 1e12;  // Hz per Hz^2
        auto factory = [&](double amplitude) -> std::unique_ptr<ISwapChannelSource> {
            double omega = amplitude;  // amplitudes passed directly as Rabi rates
            double tau = 1.0 / (2.0 * omega);
            return std::make_unique<SimpleISwapSource>(zz_only(c0 + c2 * omega * omega, tau));
        };
        std::vector<double> omegas{1e6, 2e6, 3e6, 4e6, 5e6};
        auto r = measure_total_zz_vs_drive(factory, omegas);
        CHECK(r.quadratic(0) == doctest::Approx(c0).epsilon(0.01));
        CHECK(r.quadratic(2) == doctest::Approx(c2).epsilon(0.01));
        CHECK(r.zeta_static_estimate_hz == doctest::Approx(c0).epsilon(0.01));
    }

    SUBCASE("empty amplitude list rejected") {
        auto factory = [](double) -> std::unique_ptr<ISwapChannelSource> {
            return std::make_unique<SimpleISwapSource>(gates::SimpleNoiseModel{});
        };
        CHECK_THROWS_AS(measure_total_zz_vs_drive(factory, {}), InsufficientData);
    }
}

TEST_CASE("fringe phases are 2 pi stable") {
    SuperOperator chan = unitary_to_superop(gates::u_cz(1.3));
    auto betas = phase_grid(41);
    std::vector<double> pop1, pop2;
    for (double b : betas) {
        DensityMatrix rho = circuit::ground();
        circuit::apply_q2(rho, gates::sq_rot(0.0, M_PI / 2));
        rho = chan.apply(rho);
        circuit::apply_q2(rho, circuit::readout_pulse(b));
        pop1.push_back(circuit::population_q2_excited(rho));
        DensityMatrix rho2 = circuit::ground();
        circuit::apply_q2(rho2, gates::sq_rot(0.0, M_PI / 2));
        rho2 = chan.apply(rho2);
        circuit::apply_q2(rho2, circuit::readout_pulse(b + 2 * M_PI));
        pop2.push_back(circuit::population_q2_excited(rho2));
    }
    for (size_t i = 0; i < pop1.size(); ++i) CHECK(std::abs(pop1[i] - pop2[i]) < 1e-12);
}
