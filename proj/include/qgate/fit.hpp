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
#include <functional>
#include <limits>
#include <vector>

#include "qgate/errors.hpp"

// Nonlinear least squares used by the calibration and RB pipelines.
// Frequency seeds come from the dominant bin of a direct DFT; refinement is
// damped Gauss-Newton (Levenberg-Marquardt) with a numeric Jacobian.

namespace qgate::fit {

struct CurveFit {
    Eigen::VectorXd params;
    Eigen::VectorXd std_errors;
    double rms = 0.0;
    int iterations = 0;
    bool converged = false;
};

using ModelFn = std::function<double(double x, const Eigen::VectorXd& p)>;

namespace detail {

inline Eigen::VectorXd residuals(const ModelFn& f, const std::vector<double>& x,
                                 const std::vector<double>& y, const Eigen::VectorXd& p) {
    Eigen::VectorXd r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r(i) = y[i] - f(x[i], p);
    return r;
}

inline Eigen::MatrixXd jacobian(const ModelFn& f, const std::vector<double>& x,
                                const Eigen::VectorXd& p) {
    Eigen::MatrixXd j(x.size(), p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        double h = 1e-7 * std::max(1.0, std::abs(p(k)));
        Eigen::VectorXd pp = p, pm = p;
        pp(k) += h;
        pm(k) -= h;
        for (size_t i = 0; i < x.size(); ++i)
            j(i, k) = (f(x[i], pp) - f(x[i], pm)) / (2.0 * h);
    }
    return j;
}

}  // namespace detail

/// Levenberg-Marquardt fit of y ~ f(x, p). Optional box bounds are applied
/// by projecting each trial step.
inline CurveFit lm_fit(const ModelFn& f, const std::vector<double>& x,
                       const std::vector<double>& y, Eigen::VectorXd p0,
                       const Eigen::VectorXd* lower = nullptr,
                       const Eigen::VectorXd* upper = nullptr, int max_iter = 200) {
    if (x.size() != y.size()) throw DimensionMismatch("lm_fit: x/y size mismatch");
    if (x.size() < size_t(p0.size())) throw InsufficientData("lm_fit: fewer points than parameters");

    auto clamp_params = [&](Eigen::VectorXd& p) {
        if (lower)
            for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = std::max(p(k), (*lower)(k));
        if (upper)
            for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = std::min(p(k), (*upper)(k));
    };

    clamp_params(p0);
    Eigen::VectorXd p = p0;
    Eigen::VectorXd r = detail::residuals(f, x, y, p);
    double cost = r.squaredNorm();
    double lambda = 1e-3;

    CurveFit out;
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        Eigen::MatrixXd j = detail::jacobian(f, x, p);
        Eigen::MatrixXd jtj = j.transpose() * j;
        Eigen::VectorXd jtr = j.transpose() * r;

        bool stepped = false;
        for (int tries = 0; tries < 12; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            Eigen::VectorXd step = a.ldlt().solve(jtr);
            Eigen::VectorXd cand = p + step;
            clamp_params(cand);
            Eigen::VectorXd rc = detail::residuals(f, x, y, cand);
            double cc = rc.squaredNorm();
            if (cc < cost) {
                double rel = (cost - cc) / std::max(cost, 1e-300);
                p = cand;
                r = rc;
                cost = cc;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (rel < 1e-12 || step.cwiseAbs().maxCoeff() < 1e-14) out.converged = true;
                break;
            }
            lambda *= 8.0;
        }
        if (!stepped) {
            out.converged = true;  // stuck in a minimum basin
            break;
        }
        if (out.converged) break;
    }

    out.params = p;
    out.rms = std::sqrt(cost / double(x.size()));

    // Standard errors from the linearized covariance.
    Eigen::MatrixXd j = detail::jacobian(f, x, p);
    Eigen::MatrixXd jtj = j.transpose() * j;
    double dof = std::max(1.0, double(x.size()) - double(p.size()));
    double s2 = cost / dof;
    Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * s2;
    out.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

// ---------------------------------------------------------------------------
// Frequency seeding
// ---------------------------------------------------------------------------

/// Dominant nonzero frequency of uniformly sampled data via direct DFT.
/// Returns cycles per x-unit.
inline double dominant_frequency(const std::vector<double>& x, const std::vector<double>& y) {
    size_t n = x.size();
    if (n < 4) throw InsufficientData("dominant_frequency: need >= 4 samples");
    double dx = (x.back() - x.front()) / double(n - 1);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= double(n);

    double best_mag = -1.0;
    size_t best_k = 1;
    for (size_t k = 1; k <= n / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (size_t i = 0; i < n; ++i)
            acc += (y[i] - mean) * std::exp(std::complex<double>(0, -2.0 * M_PI * double(k) * double(i) / double(n)));
        double mag = std::abs(acc);
        if (mag > best_mag) {
            best_mag = mag;
            best_k = k;
        }
    }
    return double(best_k) / (double(n) * dx);
}

// ---------------------------------------------------------------------------
// Sinusoid fits
// ---------------------------------------------------------------------------

/// Sinusoidal fit result. Model: y = amplitude * cos(2*pi*frequency*x + phase) + offset.
/// The fit is rejected (FitFailure) if the residual RMS exceeds 0.1 of the amplitude.
struct PhaseFit {
    double amplitude = 0.0;
    double phase = 0.0;
    double offset = 0.0;
    double frequency = 0.0;  // cycles per x-unit
    double rms = 0.0;
    double phase_std_error = 0.0;
};

namespace detail {

/// Linear least squares for (a, b, c) in y = a cos(w x) + b sin(w x) + c.
inline Eigen::Vector3d quadrature_solve(const std::vector<double>& x,
                                        const std::vector<double>& y, double omega) {
    Eigen::MatrixXd m(x.size(), 3);
    Eigen::VectorXd rhs(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        m(i, 0) = std::cos(omega * x[i]);
        m(i, 1) = std::sin(omega * x[i]);
        m(i, 2) = 1.0;
        rhs(i) = y[i];
    }
    return m.colPivHouseholderQr().solve(rhs);
}

}  // namespace detail

/// Fits y = A cos(2 pi f x + phi) + c with f known in advance (e.g. fringe
/// scans where the sweep variable is itself a phase).
inline PhaseFit fit_sinusoid_fixed_freq(const std::vector<double>& x,
                                        const std::vector<double>& y, double frequency) {
    if (x.size() < 4) throw InsufficientData("fit_sinusoid_fixed_freq: need >= 4 samples");
    double omega = 2.0 * M_PI * frequency;
    Eigen::Vector3d abc = detail::quadrature_solve(x, y, omega);
    PhaseFit out;
    out.frequency = frequency;
    out.amplitude = std::hypot(abc(0), abc(1));
    out.phase = std::atan2(-abc(1), abc(0));  // A cos(wx+phi) = A cos phi cos - A sin phi sin
    out.offset = abc(2);
    double ss = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double m = out.amplitude * std::cos(omega * x[i] + out.phase) + out.offset;
        ss += (y[i] - m) * (y[i] - m);
    }
    out.rms = std::sqrt(ss / double(x.size()));
    if (out.rms > 0.1 * std::abs(out.amplitude))
        throw FitFailure("fit_sinusoid_fixed_freq: residual RMS exceeds 0.1 of amplitude");
    // Phase error estimate: rms / (amplitude * sqrt(N/2)).
    out.phase_std_error = out.rms / (std::abs(out.amplitude) * std::sqrt(double(x.size()) / 2.0));
    return out;
}

/// Fits y = A cos(2 pi f x + phi) + c with the frequency free, seeded from
/// the dominant DFT bin and refined by Levenberg-Marquardt.
inline PhaseFit fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y) {
    double f0 = dominant_frequency(x, y);
    PhaseFit seed = fit_sinusoid_fixed_freq(x, y, f0);

    ModelFn model = [](double xx, const Eigen::VectorXd& p) {
        return p(0) * std::cos(2.0 * M_PI * p(1) * xx + p(2)) + p(3);
    };
    Eigen::VectorXd p0(4);
    p0 << seed.amplitude, f0, seed.phase, seed.offset;
    CurveFit r = lm_fit(model, x, y, p0);
    PhaseFit out;
    out.amplitude = std::abs(r.params(0));
    out.frequency = r.params(1);
    out.phase = r.params(0) >= 0 ? r.params(2) : r.params(2) + M_PI;
    out.offset = r.params(3);
    out.rms = r.rms;
    if (out.rms > 0.1 * out.amplitude)
        throw FitFailure("fit_sinusoid: residual RMS exceeds 0.1 of amplitude");
    out.phase_std_error = r.std_errors(2);
    return out;
}

/// Damped-sinusoid fit y = A cos(2 pi f x + phi) exp(-x/T) + c, for Ramsey
/// records. Returns the full parameter vector (A, f, phi, T, c).
struct DampedSinusoidFit {
    double amplitude = 0, frequency = 0, phase = 0, decay_time = 0, offset = 0;
    double frequency_std_error = 0;
    double rms = 0;
};

inline DampedSinusoidFit fit_damped_sinusoid(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    if (x.size() < 8) throw InsufficientData("fit_damped_sinusoid: need >= 8 samples");
    double f0 = dominant_frequency(x, y);
    PhaseFit seed;
    try {
        seed = fit_sinusoid_fixed_freq(x, y, f0);
    } catch (const FitFailure&) {
        seed.amplitude = 0.5;
        seed.phase = 0.0;
        seed.offset = 0.5;
    }
    double span = x.back() - x.front();
    ModelFn model = [](double xx, const Eigen::VectorXd& p) {
        return p(0) * std::cos(2.0 * M_PI * p(1) * xx + p(2)) * std::exp(-xx / p(3)) + p(4);
    };
    Eigen::VectorXd p0(5);
    p0 << seed.amplitude, f0, seed.phase, 2.0 * span, seed.offset;
    Eigen::VectorXd lo(5), hi(5);
    lo << -2.0, 0.0, -2.0 * M_PI, 1e-3 * span, -2.0;
    hi << 2.0, std::numeric_limits<double>::infinity(), 2.0 * M_PI, 1e6 * span, 2.0;
    CurveFit r = lm_fit(model, x, y, p0, &lo, &hi);
    if (!r.converged && r.rms > 0.2) throw FitFailure("fit_damped_sinusoid: no convergence");
    DampedSinusoidFit out;
    out.amplitude = r.params(0);
    out.frequency = r.params(1);
    out.phase = r.params(2);
    out.decay_time = r.params(3);
    out.offset = r.params(4);
    out.frequency_std_error = r.std_errors(1);
    out.rms = r.rms;
    return out;
}

// ---------------------------------------------------------------------------
// RB decay fits
// ---------------------------------------------------------------------------

struct DecayFit {
    double a = 0, p = 1, b = 0;
    double p_std_error = 0;
    double rms = 0;
};

/// Fits F(m) = A p^m + B. p is seeded by log-linear regression on (F - 1/4)
/// and constrained to (0, 1].
inline DecayFit fit_rb_decay(const std::vector<double>& m, const std::vector<double>& f,
                             double b_guess = 0.25) {
    if (m.size() < 3) throw InsufficientData("fit_rb_decay: need >= 3 lengths");

    // Flat, noiseless data (e.g. an ideal backend) has no decay to fit.
    double fmin = *std::min_element(f.begin(), f.end());
    double fmax = *std::max_element(f.begin(), f.end());
    if (fmax - fmin < 1e-12) {
        DecayFit out;
        out.a = fmax - b_guess;
        out.p = 1.0;
        out.b = b_guess;
        return out;
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < m.size(); ++i) {
        double v = f[i] - b_guess;
        if (v <= 1e-9) continue;
        sx += m[i];
        sy += std::log(v);
        sxx += m[i] * m[i];
        sxy += m[i] * std::log(v);
        ++n;
    }
    double p_seed = 0.99, a_seed = 0.75;
    if (n >= 2 && (n * sxx - sx * sx) > 1e-12) {
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        double inter = (sy - slope * sx) / n;
        p_seed = std::clamp(std::exp(slope), 1e-6, 1.0);
        a_seed = std::clamp(std::exp(inter), 1e-6, 1.5);
    }

    ModelFn model = [](double mm, const Eigen::VectorXd& p) {
        return p(0) * std::pow(p(1), mm) + p(2);
    };
    Eigen::VectorXd p0(3), lo(3), hi(3);
    p0 << a_seed, p_seed, b_guess;
    lo << 0.0, 1e-9, 0.0;
    hi << 1.0, 1.0, 1.0;
    CurveFit r = lm_fit(model, m, f, p0, &lo, &hi);
    DecayFit out;
    out.a = r.params(0);
    out.p = r.params(1);
    out.b = r.params(2);
    out.p_std_error = r.std_errors(1);
    out.rms = r.rms;
    if (out.p <= 0.0 || out.p > 1.0) throw FitFailure("fit_rb_decay: p out of (0, 1]");
    return out;
}

/// Fits purity(m) = A gamma^(2m) + B.
inline DecayFit fit_purity_decay(const std::vector<double>& m, const std::vector<double>& pur) {
    std::vector<double> m2(m.size());
    for (size_t i = 0; i < m.size(); ++i) m2[i] = 2.0 * m[i];
    DecayFit out = fit_rb_decay(m2, pur, 0.25);  // fit in the 2m variable
    return out;
}

// ---------------------------------------------------------------------------
// Misc fits
// ---------------------------------------------------------------------------

/// Least-squares quadratic y = c0 + c1 x + c2 x^2; returns (c0, c1, c2).
inline Eigen::Vector3d fit_quadratic(const std::vector<double>& x,
                                     const std::vector<double>& y) {
    if (x.size() < 3) throw InsufficientData("fit_quadratic: need >= 3 points");
    Eigen::MatrixXd m(x.size(), 3);
    Eigen::VectorXd rhs(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        m(i, 0) = 1.0;
        m(i, 1) = x[i];
        m(i, 2) = x[i] * x[i];
        rhs(i) = y[i];
    }
    return m.colPivHouseholderQr().solve(rhs);
}

/// Method-of-moments Gamma fit (shape, scale) with a degenerate-data flag.
struct GammaFit {
    double shape = 0;
    double scale = 0;
    bool degenerate = false;
};

inline GammaFit gamma_fit_moments(const std::vector<double>& samples) {
    if (samples.size() < 2) throw InsufficientData("gamma_fit_moments: need >= 2 samples");
    double mean = 0;
    for (double s : samples) mean += s;
    mean /= double(samples.size());
    double var = 0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= double(samples.size() - 1);
    GammaFit out;
    if (var < 1e-16 || mean <= 0.0) {
        out.degenerate = true;
        return out;
    }
    out.shape = mean * mean / var;
    out.scale = var / mean;
    return out;
}

}  // namespace qgate::fit
