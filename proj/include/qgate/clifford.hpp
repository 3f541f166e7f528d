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
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "qgate/gates.hpp"
#include "qgate/qmath.hpp"

// The two-qubit Clifford group (11520 elements) with native decompositions.
//
// Elements are stored as canonical unitaries: the global phase is fixed by
// making the first nonzero entry (row-major scan) real positive, and the
// entries are quantized to a 1e-6 grid for hashing. The group is built by
// enumerating products layer-by-layer in the number of entangling gates,
// which yields for every element a minimal-depth decomposition over each
// native set and its equivalence class:
//
//   entangling gates (CZ set):    0 = single-qubit, 1 = CNOT-like,
//                                 2 = iSWAP-like,   3 = SWAP-like
//   entangling gates (iSWAP set): 0, 2, 1, 3 for the same classes
//
// Class sizes are 576 / 5184 / 5184 / 576; both native sets average exactly
// 1.5 entangling gates per Clifford.

namespace qgate::cliff {

using Matrix4 = Eigen::Matrix4cd;

enum class CliffordClass { SingleQubit = 0, CnotLike = 1, ISwapLike = 2, SwapLike = 3 };

struct CliffordElement {
    int index = -1;
    Matrix4 u;  // canonical unitary
    CliffordClass cls = CliffordClass::SingleQubit;
    std::vector<gates::GateKind> decomp_cz;     // application order, CZ-native
    std::vector<gates::GateKind> decomp_iswap;  // application order, iSWAP-native
    int n_cz = 0;
    int n_iswap = 0;
};

// ---------------------------------------------------------------------------
// Canonical form and hashing
// ---------------------------------------------------------------------------

using CanonicalKey = std::array<int32_t, 32>;

struct KeyHash {
    size_t operator()(const CanonicalKey& k) const {
        uint64_t h = 1469598103934665603ull;
        for (int32_t v : k) {
            h ^= uint64_t(uint32_t(v));
            h *= 1099511628211ull;
        }
        return size_t(h);
    }
};

/// Fixes the global phase so the first nonzero entry in row-major order is
/// real positive.
inline Matrix4 canonicalize(const Matrix4& u) {
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            Complex v = u(i, j);
            if (std::abs(v) > 1e-8) return u * (std::conj(v) / std::abs(v));
        }
    }
    return u;
}

inline CanonicalKey canonical_key(const Matrix4& canonical_u) {
    CanonicalKey k;
    int idx = 0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            k[idx++] = int32_t(llround(canonical_u(i, j).real() * 1e6));
            k[idx++] = int32_t(llround(canonical_u(i, j).imag() * 1e6));
        }
    }
    return k;
}

// ---------------------------------------------------------------------------
// Single-qubit Clifford layer
// ---------------------------------------------------------------------------

namespace detail {

struct SqClifford {
    Eigen::Matrix2cd u;
    std::vector<gates::GateKind> gate_list;  // on qubit 0; retarget as needed
};

/// The 24 single-qubit Cliffords as shortest words over +-90 and 180 degree
/// X/Y rotations.
inline std::vector<SqClifford> single_qubit_cliffords() {
    using gates::GateKind;
    const double pi = M_PI;
    struct Gen {
        Eigen::Matrix2cd u;
        GateKind g;
    };
    std::vector<Gen> gens;
    auto add_gen = [&](double beta, double angle) {
        Gen gen{gates::sq_rot(beta, angle), GateKind::rot(0, beta, angle)};
        gens.push_back(gen);
    };
    add_gen(0.0, pi / 2);        // X90
    add_gen(0.0, -pi / 2);       // X-90
    add_gen(pi / 2, pi / 2);     // Y90
    add_gen(pi / 2, -pi / 2);    // Y-90
    add_gen(0.0, pi);            // X180
    add_gen(pi / 2, pi);         // Y180

    // full quantized array as the map key; a plain hash value is not
    // collision-safe for sign-flipped entries
    auto key2 = [](const Eigen::Matrix2cd& m) {
        Eigen::Matrix2cd c = m;
        // phase-fix on first nonzero entry
        for (int i = 0; i < 4; ++i) {
            Complex v = m(i / 2, i % 2);
            if (std::abs(v) > 1e-8) {
                c = m * (std::conj(v) / std::abs(v));
                break;
            }
        }
        std::array<int64_t, 8> k;
        for (int i = 0; i < 4; ++i) {
            k[2 * i] = llround(c(i / 2, i % 2).real() * 1e6);
            k[2 * i + 1] = llround(c(i / 2, i % 2).imag() * 1e6);
        }
        return k;
    };

    std::vector<SqClifford> out;
    std::map<std::array<int64_t, 8>, int> seen;
    std::vector<int> frontier;
    SqClifford identity{Eigen::Matrix2cd::Identity(), {}};
    out.push_back(identity);
    seen[key2(identity.u)] = 0;
    frontier.push_back(0);
    while (!frontier.empty() && out.size() < 24) {
        std::vector<int> next;
        for (int idx : frontier) {
            for (const auto& gen : gens) {
                SqClifford cand;
                cand.u = gen.u * out[idx].u;  // gen applied after the word
                cand.gate_list = out[idx].gate_list;
                cand.gate_list.push_back(gen.g);
                auto k = key2(cand.u);
                if (seen.count(k)) continue;
                seen[k] = int(out.size());
                next.push_back(int(out.size()));
                out.push_back(std::move(cand));
            }
        }
        frontier = std::move(next);
    }
    if (out.size() != 24)
        throw InvariantViolation("single_qubit_cliffords: expected 24 elements");
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Group construction
// ---------------------------------------------------------------------------

class CliffordGroup {
public:
    static const CliffordGroup& instance() {
        static CliffordGroup group;
        return group;
    }

    const std::vector<CliffordElement>& elements() const { return elements_; }
    size_t size() const { return elements_.size(); }
    const CliffordElement& operator[](int i) const { return elements_[i]; }

    /// Index of the group element equal to u up to global phase; -1 if the
    /// matrix is not a Clifford.
    int lookup(const Matrix4& u) const {
        auto it = index_.find(canonical_key(canonicalize(u)));
        return it == index_.end() ? -1 : it->second;
    }

    /// Index of the inverse of the given group element.
    int inverse_index(int i) const { return inverse_[i]; }

    int identity_index() const { return identity_; }

private:
    std::vector<CliffordElement> elements_;
    std::unordered_map<CanonicalKey, int, KeyHash> index_;
    std::vector<int> inverse_;
    int identity_ = -1;

    struct Layer {
        Matrix4 u;
        std::vector<gates::GateKind> gates;  // application order
    };

    static std::vector<Layer> build_layers() {
        auto sq = detail::single_qubit_cliffords();
        std::vector<Layer> layers;
        layers.reserve(576);
        for (const auto& a : sq) {
            for (const auto& b : sq) {
                Layer l;
                l.u = kron(a.u, b.u);
                for (auto g : a.gate_list) {
                    g.qubit = 0;
                    l.gates.push_back(g);
                }
                for (auto g : b.gate_list) {
                    g.qubit = 1;
                    l.gates.push_back(g);
                }
                layers.push_back(std::move(l));
            }
        }
        return layers;
    }

    /// Enumerates the group as layered products L * E * L * ... * E * L with
    /// a fixed entangling gate E, recording minimal entangling counts and
    /// application-order decompositions.
    struct Enumerated {
        std::vector<Matrix4> unitaries;
        std::vector<std::vector<gates::GateKind>> decomps;
        std::vector<int> depth;
        std::unordered_map<CanonicalKey, int, KeyHash> index;
    };

    static Enumerated enumerate(const std::vector<Layer>& layers, const gates::GateKind& ent) {
        Enumerated g;
        Matrix4 e = ent.unitary4();

        // Visit layers in a fixed pseudo-random order. The first-found
        // factorization then interleaves generic single-qubit layers between
        // entangling gates instead of identity-biased ones, which would stack
        // coherent errors of consecutive entangling gates unrealistically.
        std::vector<int> order(layers.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
        uint64_t state = 0x123456789abcdef1ull;
        for (size_t i = order.size(); i > 1; --i) {
            state = state * 6364136223846793005ull + 1442695040888963407ull;
            std::swap(order[i - 1], order[(state >> 33) % i]);
        }

        auto insert = [&](const Matrix4& u, std::vector<gates::GateKind> decomp, int depth) {
            Matrix4 cu = canonicalize(u);
            CanonicalKey key = canonical_key(cu);
            auto it = g.index.find(key);
            if (it != g.index.end()) return false;
            g.index.emplace(key, int(g.unitaries.size()));
            g.unitaries.push_back(cu);
            g.decomps.push_back(std::move(decomp));
            g.depth.push_back(depth);
            return true;
        };

        for (const auto& l : layers) insert(l.u, l.gates, 0);

        size_t pass_begin = 0;
        for (int depth = 1; depth <= 3 && g.unitaries.size() < 11520; ++depth) {
            size_t pass_end = g.unitaries.size();
            for (size_t i = pass_begin; i < pass_end && g.unitaries.size() < 11520; ++i) {
                Matrix4 core = g.unitaries[i] * e;  // E applied before element i
                for (int li : order) {
                    const Layer& l = layers[li];
                    Matrix4 u = core * l.u;  // layer applied first
                    std::vector<gates::GateKind> d = l.gates;
                    d.push_back(ent);
                    d.insert(d.end(), g.decomps[i].begin(), g.decomps[i].end());
                    insert(u, std::move(d), depth);
                    if (g.unitaries.size() == 11520) break;
                }
            }
            pass_begin = pass_end;
        }
        return g;
    }

    CliffordGroup() {
        auto layers = build_layers();
        Enumerated cz = enumerate(layers, gates::GateKind::cz(M_PI));
        Enumerated is = enumerate(layers, gates::GateKind::iswap(M_PI, 0.0));
        if (cz.unitaries.size() != 11520 || is.unitaries.size() != 11520)
            throw InvariantViolation("CliffordGroup: closure did not reach 11520 elements");

        elements_.resize(11520);
        static constexpr int kExpectedISwapDepth[4] = {0, 2, 1, 3};
        std::array<int, 4> class_counts{0, 0, 0, 0};
        for (int i = 0; i < 11520; ++i) {
            CliffordElement& el = elements_[i];
            el.index = i;
            el.u = cz.unitaries[i];
            el.decomp_cz = cz.decomps[i];
            el.n_cz = cz.depth[i];
            el.cls = CliffordClass(cz.depth[i]);
            class_counts[cz.depth[i]]++;
            auto it = is.index.find(canonical_key(el.u));
            if (it == is.index.end())
                throw InvariantViolation("CliffordGroup: iSWAP enumeration disagrees");
            el.decomp_iswap = is.decomps[it->second];
            el.n_iswap = is.depth[it->second];
            if (el.n_iswap != kExpectedISwapDepth[int(el.cls)])
                throw InvariantViolation("CliffordGroup: class/entangling-count mismatch");
            index_.emplace(canonical_key(el.u), i);
        }
        if (class_counts != std::array<int, 4>{576, 5184, 5184, 576})
            throw InvariantViolation("CliffordGroup: unexpected class sizes");

        identity_ = lookup(Matrix4::Identity());
        inverse_.resize(11520);
        for (int i = 0; i < 11520; ++i) {
            int inv = lookup(elements_[i].u.adjoint());
            if (inv < 0) throw InvariantViolation("CliffordGroup: missing inverse");
            inverse_[i] = inv;
        }
    }
};

/// Product of a decomposition in application order (first gate rightmost).
inline Matrix4 decomposition_unitary(const std::vector<gates::GateKind>& gate_list) {
    Matrix4 u = Matrix4::Identity();
    for (const auto& g : gate_list) u = g.unitary4() * u;
    return u;
}

}  // namespace qgate::cliff
