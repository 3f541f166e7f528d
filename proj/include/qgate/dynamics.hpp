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
#include <chrono>
#include <optional>
#include <vector>

#include "qgate/device.hpp"
#include "qgate/gates.hpp"
#include "qgate/qmath.hpp"
#include "qgate/util.hpp"

// Time-dependent Lindblad master equation for the three-mode model under a
// flux pulse. Integration happens in the frame rotating at each mode's bare
// frequency (coupler reference: its frequency at the DC bias), which removes
// the GHz carriers; the couplings keep explicit detuning phases and the
// coupler keeps its time-dependent frequency excursion. The dissipators are
// invariant under this frame change. States are reported in the rotating
// frame, which is also the experiment's phase bookkeeping.

namespace qgate::dynamics {

// ---------------------------------------------------------------------------
// Collapse rates
// ---------------------------------------------------------------------------

/// Per-mode decay and dephasing rates. gamma_down = 1/T1; the stored
/// dephasing rate is Gamma_z = 1/(2 T_phi) with 1/T_phi = 1/T2* - 1/(2 T1).
/// The dephasing dissipator is scaled such that the 0<->1 coherence of a
/// mode decays at exactly 1/T_phi (i.e. D[sqrt(2/T_phi) n]).
struct CollapseSet {
    std::vector<double> gamma_down;  // 1/T1 per mode
    std::vector<double> gamma_z;     // 1/(2 T_phi) per mode

    static double pure_dephasing_rate(double t1_s, double t2_star_s) {
        double inv = 1.0 / t2_star_s - 0.5 / t1_s;
        if (inv < -1e-12 * (1.0 / t2_star_s + 1.0))
            throw InvalidNoise("CollapseSet: T2* exceeds 2*T1");
        return std::max(inv, 0.0);
    }

    static CollapseSet from_model(const device::DeviceModel& m) {
        CollapseSet c;
        c.gamma_down = {1.0 / m.q1.t1_s, 1.0 / m.q2.t1_s, 1.0 / m.tc.t1_s};
        c.gamma_z = {0.5 * pure_dephasing_rate(m.q1.t1_s, m.q1.t2_star_s),
                     0.5 * pure_dephasing_rate(m.q2.t1_s, m.q2.t2_star_s),
                     0.5 * pure_dephasing_rate(m.tc.t1_s, m.tc.t2_star_s)};
        return c;
    }

    static CollapseSet none(int modes = 3) {
        CollapseSet c;
        c.gamma_down.assign(modes, 0.0);
        c.gamma_z.assign(modes, 0.0);
        return c;
    }

    bool all_zero() const {
        for (double g : gamma_down)
            if (g != 0.0) return false;
        for (double g : gamma_z)
            if (g != 0.0) return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// Generic dense Lindblad right-hand side (reference path)
// ---------------------------------------------------------------------------

/// drho/dt = -i[H, rho] + sum_m Gamma_down D[a_m] + (2/T_phi) D[n_m], with
/// H in rad/s. Works on the full multi-mode space; `levels` is the per-mode
/// level count and the collapse set supplies one rate pair per mode.
inline ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const ComplexMatrix& h,
                                  const CollapseSet& collapse, int levels) {
    const Eigen::Index d = rho.mat.rows();
    if (h.rows() != d) throw DimensionMismatch("lindblad_rhs: H and rho dimensions differ");
    int modes = int(collapse.gamma_down.size());
    Eigen::Index expected = 1;
    for (int m = 0; m < modes; ++m) expected *= levels;
    if (expected != d) throw DimensionMismatch("lindblad_rhs: mode structure mismatch");

    ComplexMatrix hr = h * rho.mat;
    ComplexMatrix out = -kI * (hr - hr.adjoint());

    ComplexMatrix a1 = lowering_op(levels);
    ComplexMatrix num = number_op(levels);
    for (int m = 0; m < modes; ++m) {
        ComplexMatrix id_total = ComplexMatrix::Identity(levels, levels);
        ComplexMatrix a_m = ComplexMatrix::Identity(1, 1);
        ComplexMatrix n_m = ComplexMatrix::Identity(1, 1);
        for (int k = 0; k < modes; ++k) {
            a_m = kron(a_m, k == m ? a1 : id_total);
            n_m = kron(n_m, k == m ? num : id_total);
        }
        if (collapse.gamma_down[m] != 0.0) {
            ComplexMatrix anticomm = a_m.adjoint() * a_m * rho.mat + rho.mat * a_m.adjoint() * a_m;
            out += collapse.gamma_down[m] * (a_m * rho.mat * a_m.adjoint() - 0.5 * anticomm);
        }
        if (collapse.gamma_z[m] != 0.0) {
            double kappa = 2.0 * collapse.gamma_z[m];  // = 1/T_phi
            ComplexMatrix anticomm = n_m * n_m * rho.mat + rho.mat * n_m * n_m;
            out += 2.0 * kappa * (n_m * rho.mat * n_m - 0.5 * anticomm);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evolution options and result
// ---------------------------------------------------------------------------

struct EvolveOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 2e-12;        // seconds
    double h_max = 0.0;           // 0 = unlimited
    double sample_dt = 0.0;       // 0 = final state only
    double waveform_cache_dt = 0.0;  // 0 = exact per-stage evaluation
    bool decoherence = true;
    long max_steps = 200000000;
};

struct TrajectorySample {
    double t = 0.0;
    DensityMatrix state;
};

struct EvolutionResult {
    DensityMatrix final_state;  // full Hilbert space, rotating frame
    std::vector<TrajectorySample> trajectory;
    double leakage = 0.0;  // outside the computational subspace at the end
    double wall_time_s = 0.0;
    long steps = 0;
};

// ---------------------------------------------------------------------------
// Structured right-hand side for the rotating frame
// ---------------------------------------------------------------------------

namespace detail {

struct CooTerm {
    int row, col;
    double value;
};

/// Precomputed rotating-frame generator. The Hamiltonian is
///   H(t) = diag_static + d_wc(t) n_c + sum_k [c_k(t) A_k + conj(c_k(t)) A_k^T]
/// with fixed sparse A_k and scalar coefficients; dissipators reduce to
/// index-shifted and elementwise updates.
class RotatingFrame {
public:
    RotatingFrame(const device::DeviceModel& model, const device::FluxPulse& pulse,
                  bool decoherence, double cache_dt)
        : model_(model), pulse_(pulse), cache_dt_(cache_dt) {
        n_ = model.levels_per_mode;
        d_ = model.hilbert_dim();
        wc_ref_ = device::coupler_frequency(model.tc, model.tc.dc_flux);

        level_.resize(d_);
        for (int i = 0; i < d_; ++i) {
            level_[i] = {i / (n_ * n_), (i / n_) % n_, i % n_};
        }

        diag_static_.assign(d_, 0.0);
        nc_.assign(d_, 0.0);
        const double two_pi = 2.0 * M_PI;
        const double anh[3] = {model.q1.anharmonicity_hz, model.q2.anharmonicity_hz,
                               model.tc.anharmonicity_hz};
        for (int i = 0; i < d_; ++i) {
            for (int m = 0; m < 3; ++m) {
                double nm = level_[i][m];
                diag_static_[i] += two_pi * anh[m] * 0.5 * nm * (nm - 1.0);
            }
            if (level_[i][0] == 1 && level_[i][1] == 1)
                diag_static_[i] += two_pi * model.zz_term_hz;
            nc_[i] = level_[i][2];
        }

        // raising-type coupling blocks a_x^dag a_y (x gains, y loses)
        auto coupling_block = [&](int x, int y) {
            std::vector<CooTerm> coo;
            for (int j = 0; j < d_; ++j) {
                const auto& lv = level_[j];
                if (lv[x] + 1 < n_ && lv[y] > 0) {
                    int stride_x = x == 0 ? n_ * n_ : (x == 1 ? n_ : 1);
                    int stride_y = y == 0 ? n_ * n_ : (y == 1 ? n_ : 1);
                    int i = j + stride_x - stride_y;
                    double v = std::sqrt(double(lv[x] + 1)) * std::sqrt(double(lv[y]));
                    coo.push_back({i, j, v});
                }
            }
            return coo;
        };
        const double w1 = two_pi * model.q1.frequency_hz;
        const double w2 = two_pi * model.q2.frequency_hz;
        const double wc = two_pi * wc_ref_;
        couplings_.push_back({coupling_block(0, 2), two_pi * model.q1.coupling_hz, w1 - wc});
        couplings_.push_back({coupling_block(1, 2), two_pi * model.q2.coupling_hz, w2 - wc});
        if (model.g12_hz != 0.0)
            couplings_.push_back({coupling_block(0, 1), two_pi * model.g12_hz, w1 - w2});

        scratch_ = ComplexMatrix::Zero(d_, d_);
        collapse_ = decoherence ? CollapseSet::from_model(model) : CollapseSet::none();
        // dephasing decay factor per element: sum_m (dn_m)^2 / T_phi_m
        deph_.assign(size_t(d_) * d_, 0.0);
        damp_half_.assign(size_t(d_) * d_, 0.0);
        for (int i = 0; i < d_; ++i) {
            for (int j = 0; j < d_; ++j) {
                double deph = 0.0, damp = 0.0;
                for (int m = 0; m < 3; ++m) {
                    double dn = level_[i][m] - level_[j][m];
                    deph += 2.0 * collapse_.gamma_z[m] * dn * dn;
                    damp += 0.5 * collapse_.gamma_down[m] * (level_[i][m] + level_[j][m]);
                }
                deph_[size_t(i) * d_ + j] = deph;
                damp_half_[size_t(i) * d_ + j] = damp;
            }
        }
        has_decoherence_ = !collapse_.all_zero();
    }

    int dim() const { return d_; }
    const CollapseSet& collapse() const { return collapse_; }

    /// Writes drho/dt into `out`. Not thread-safe (per-instance scratch);
    /// each evolve() owns its RotatingFrame.
    void operator()(double t, const ComplexMatrix& rho, ComplexMatrix& out) const {
        double t_eval = t;
        if (cache_dt_ > 0.0) t_eval = std::round(t / cache_dt_) * cache_dt_;
        double flux = sampled_flux(t_eval);
        double dwc = 2.0 * M_PI * (device::coupler_frequency(model_.tc, flux) - wc_ref_);

        // M = H rho with H = diag(t) + sparse couplings
        ComplexMatrix& m = scratch_;
        const Complex* r = rho.data();
        Complex* mp = m.data();
        for (int j = 0; j < d_; ++j) {
            const Complex* rc = r + size_t(j) * d_;
            Complex* mc = mp + size_t(j) * d_;
            for (int i = 0; i < d_; ++i) mc[i] = (diag_static_[i] + dwc * nc_[i]) * rc[i];
        }
        for (const auto& term : couplings_) {
            Complex c = term.g * std::exp(kI * (term.detuning * t));
            Complex cc = std::conj(c);
            for (const auto& e : term.coo) {
                Complex cv = c * e.value, ccv = cc * e.value;
                for (int j = 0; j < d_; ++j) {
                    Complex* mc = mp + size_t(j) * d_;
                    const Complex* rc = r + size_t(j) * d_;
                    mc[e.row] += cv * rc[e.col];
                    mc[e.col] += ccv * rc[e.row];
                }
            }
        }
        // -i (M - M^dag), fused; with dissipator elementwise terms
        Complex* op = out.data();
        if (has_decoherence_) {
            for (int j = 0; j < d_; ++j) {
                for (int i = 0; i < d_; ++i) {
                    Complex v = mp[size_t(j) * d_ + i] - std::conj(mp[size_t(i) * d_ + j]);
                    double rate = deph_[size_t(i) * d_ + j] + damp_half_[size_t(i) * d_ + j];
                    op[size_t(j) * d_ + i] =
                        -kI * v - rate * r[size_t(j) * d_ + i];
                }
            }
            // Gamma a rho a^dag refilling terms
            for (int mode = 0; mode < 3; ++mode) {
                double gd = collapse_.gamma_down[mode];
                if (gd == 0.0) continue;
                int stride = mode == 0 ? n_ * n_ : (mode == 1 ? n_ : 1);
                for (int j = 0; j < d_; ++j) {
                    const auto& lj = level_[j];
                    if (lj[mode] + 1 >= n_) continue;
                    double sj = std::sqrt(double(lj[mode] + 1));
                    for (int i = 0; i < d_; ++i) {
                        const auto& li = level_[i];
                        if (li[mode] + 1 >= n_) continue;
                        double si = std::sqrt(double(li[mode] + 1));
                        op[size_t(j) * d_ + i] +=
                            gd * si * sj * r[size_t(j + stride) * d_ + i + stride];
                    }
                }
            }
        } else {
            for (int j = 0; j < d_; ++j)
                for (int i = 0; i < d_; ++i)
                    op[size_t(j) * d_ + i] =
                        -kI * (mp[size_t(j) * d_ + i] - std::conj(mp[size_t(i) * d_ + j]));
        }
    }

private:
    device::DeviceModel model_;
    device::FluxPulse pulse_;
    double cache_dt_;
    int n_ = 3, d_ = 27;
    double wc_ref_ = 0.0;
    std::vector<std::array<int, 3>> level_;
    std::vector<double> diag_static_, nc_;
    struct Coupling {
        std::vector<CooTerm> coo;
        double g;
        double detuning;
    };
    std::vector<Coupling> couplings_;
    CollapseSet collapse_;
    std::vector<double> deph_, damp_half_;
    bool has_decoherence_ = true;
    mutable ComplexMatrix scratch_;

    double sampled_flux(double t) const {
        if (t <= 0.0 || t >= pulse_.duration() || pulse_.amplitude == 0.0)
            return model_.tc.dc_flux;
        return device::flux_waveform(pulse_, model_.tc, t);
    }
};

// Dormand-Prince 5(4) coefficients
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // embedded 4th-order weights
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                            e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Master-equation integration
// ---------------------------------------------------------------------------

/// Integrates the rotating-frame master equation from t = 0 to the pulse
/// duration with adaptive Dormand-Prince 5(4) steps.
inline EvolutionResult evolve(const device::DeviceModel& model, const device::FluxPulse& pulse,
                              const DensityMatrix& rho0, const EvolveOptions& options = {}) {
    pulse.validate();
    if (rho0.dim() != model.hilbert_dim())
        throw DimensionMismatch("evolve: initial state does not match the model dimension");

    auto wall_start = std::chrono::steady_clock::now();
    detail::RotatingFrame rhs(model, pulse, options.decoherence, options.waveform_cache_dt);
    using D = detail::Dopri5;

    const double t_end = pulse.duration();
    const int d = rhs.dim();
    ComplexMatrix y = rho0.mat;
    ComplexMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), k5(d, d), k6(d, d), k7(d, d);
    ComplexMatrix ytmp(d, d), y5(d, d), err(d, d);

    EvolutionResult result;
    std::vector<double> samples;
    if (options.sample_dt > 0.0) {
        result.trajectory.push_back({0.0, DensityMatrix(y)});
        for (double ts = options.sample_dt; ts < t_end - 1e-15; ts += options.sample_dt)
            samples.push_back(ts);
    }
    samples.push_back(t_end);

    double t = 0.0;
    double h_ctrl = std::min(options.h_init, t_end);
    const double h_min = std::max(1e-18, t_end * 1e-14);
    long steps = 0;

    for (size_t next = 0; next < samples.size();) {
        double target = samples[next];
        if (++steps > options.max_steps)
            throw IntegrationFailure("evolve: step budget exhausted");

        double h = h_ctrl;
        if (options.h_max > 0.0) h = std::min(h, options.h_max);
        bool capped = t + h >= target;
        if (capped) h = target - t;

        rhs(t, y, k1);
        ytmp = y + (h * D::a21) * k1;
        rhs(t + D::c2 * h, ytmp, k2);
        ytmp = y + h * (D::a31 * k1 + D::a32 * k2);
        rhs(t + D::c3 * h, ytmp, k3);
        ytmp = y + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3);
        rhs(t + D::c4 * h, ytmp, k4);
        ytmp = y + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4);
        rhs(t + D::c5 * h, ytmp, k5);
        ytmp = y + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5);
        rhs(t + h, ytmp, k6);
        y5 = y + h * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
        rhs(t + h, y5, k7);
        err = y5 - (y + h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 +
                             D::e7 * k7));

        // weighted RMS error norm
        double acc = 0.0;
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i) {
                double scale = options.atol +
                               options.rtol * std::max(std::abs(y(i, j)), std::abs(y5(i, j)));
                double e = std::abs(err(i, j)) / scale;
                acc += e * e;
            }
        }
        double norm = std::sqrt(acc / double(d * d));
        bool accepted = norm <= 1.0;

        if (accepted) {
            t += h;
            y.swap(y5);
            if (capped) {
                if (options.sample_dt > 0.0) result.trajectory.push_back({t, DensityMatrix(y)});
                ++next;
            }
        }
        double factor = norm > 0 ? std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0) : 5.0;
        double h_new = h * factor;
        // a step shortened only to land on a sample must not shrink the controller
        h_ctrl = (capped && accepted) ? std::max(h_ctrl, h_new) : h_new;
        if (h_ctrl < h_min) throw IntegrationFailure("evolve: step size underflow");
    }

    double trace = y.trace().real();
    if (std::abs(trace - 1.0) > 1e-6)
        throw InvariantViolation("evolve: trace drifted beyond 1e-6");

    result.final_state = DensityMatrix(std::move(y));
    result.steps = steps;
    try {
        auto proj = project_computational(result.final_state, model.dims());
        result.leakage = proj.leakage;
    } catch (const LeakageDominates&) {
        result.leakage = 1.0;
    }
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result;
}

// ---------------------------------------------------------------------------
// Process tomography of a pulse
// ---------------------------------------------------------------------------

struct FrameCorrections {
    double phi10 = 0.0;  // virtual-Z compensation on qubit 1
    double phi01 = 0.0;  // virtual-Z compensation on qubit 2
};

struct GateTomography {
    SuperOperator channel;   // 4x4 Hilbert, 16x16 Liouville
    double max_leakage = 0.0;
};

namespace detail {

inline std::vector<ComplexVector> tomography_kets() {
    ComplexVector k0(2), k1(2), kp(2), ki(2);
    k0 << 1, 0;
    k1 << 0, 1;
    kp << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    ki << 1.0 / std::sqrt(2.0), kI / std::sqrt(2.0);
    return {k0, k1, kp, ki};
}

}  // namespace detail

/// Embeds a two-qubit pure state with the coupler in its ground state.
inline DensityMatrix embed_computational(const ComplexVector& two_qubit_ket,
                                         const device::DeviceModel& model) {
    const int n = model.levels_per_mode;
    ComplexVector full = ComplexVector::Zero(model.hilbert_dim());
    for (int q1 = 0; q1 < 2; ++q1)
        for (int q2 = 0; q2 < 2; ++q2)
            full((q1 * n + q2) * n) = two_qubit_ket(q1 * 2 + q2);
    return DensityMatrix::pure(full);
}

/// Runs the pulse on the 16 product inputs {|0>,|1>,|+>,|+i>}^2, projects
/// onto the computational subspace, applies the virtual-Z frame corrections
/// and reconstructs the two-qubit map by linear inversion.
inline GateTomography simulate_gate_superop(const device::DeviceModel& model,
                                            const device::FluxPulse& pulse,
                                            const FrameCorrections& corrections = {},
                                            const EvolveOptions& options = {}, int threads = 0) {
    auto kets = detail::tomography_kets();
    std::vector<ComplexVector> inputs;
    for (const auto& ka : kets)
        for (const auto& kb : kets) {
            ComplexVector two_qubit(4);
            two_qubit << ka(0) * kb(0), ka(0) * kb(1), ka(1) * kb(0), ka(1) * kb(1);
            inputs.push_back(two_qubit);
        }

    std::vector<ComplexMatrix> outputs(16);
    std::vector<double> leakages(16, 0.0);
    parallel_for(16, [&](size_t k) {
        DensityMatrix rho0 = embed_computational(inputs[k], model);
        EvolutionResult ev = evolve(model, pulse, rho0, options);
        auto proj = project_computational(ev.final_state, model.dims());
        outputs[k] = proj.rho.mat;
        leakages[k] = proj.leakage;
    }, threads);

    ComplexMatrix corr =
        kron(gates::virtual_z(corrections.phi10), gates::virtual_z(corrections.phi01));
    ComplexMatrix m_in(16, 16), m_out(16, 16);
    for (int k = 0; k < 16; ++k) {
        ComplexMatrix rho_in = inputs[k] * inputs[k].adjoint();
        m_in.col(k) = vec(rho_in);
        ComplexMatrix rho_out = corr * outputs[k] * corr.adjoint();
        m_out.col(k) = vec(rho_out);
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m_in, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double cond = svd.singularValues()(0) / svd.singularValues()(15);
    if (!(cond < 1e6))
        throw IllConditionedInversion("simulate_gate_superop: input basis ill-conditioned");
    ComplexMatrix s = m_out * svd.solve(ComplexMatrix::Identity(16, 16));

    GateTomography out;
    out.channel = SuperOperator(4, s);
    out.max_leakage = *std::max_element(leakages.begin(), leakages.end());
    return out;
}

}  // namespace qgate::dynamics
