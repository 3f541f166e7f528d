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

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "qgate/device.hpp"
#include "qgate/gates.hpp"
#include "qgate/noise.hpp"

// Versioned experiment configuration. Units in the files are GHz (mode
// frequencies), MHz (anharmonicities and couplings), us (coherence times),
// ns (gate durations), kHz (ZZ shifts) and fractions of Phi_0 (flux);
// unknown keys are rejected.

namespace qgate::config {

using json = nlohmann::ordered_json;

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("ConfigNotFound: " + path.string());
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

inline double require_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    if (!j[key].is_number()) throw ConfigError("key '" + key + "' in " + where + " must be a number");
    return j[key].get<double>();
}

// ---------------------------------------------------------------------------
// Device
// ---------------------------------------------------------------------------

inline device::TransmonParams parse_transmon(const json& j, const std::string& where) {
    reject_unknown_keys(j,
                        {"frequency_ghz", "anharmonicity_mhz", "coupling_mhz", "t1_us",
                         "t2_echo_us", "t2_star_us"},
                        where);
    device::TransmonParams p;
    p.frequency_hz = require_number(j, "frequency_ghz", where) * 1e9;
    p.anharmonicity_hz = require_number(j, "anharmonicity_mhz", where) * 1e6;
    p.coupling_hz = require_number(j, "coupling_mhz", where) * 1e6;
    p.t1_s = require_number(j, "t1_us", where) * 1e-6;
    p.t2_echo_s = j.contains("t2_echo_us") ? j["t2_echo_us"].get<double>() * 1e-6 : INFINITY;
    p.t2_star_s = require_number(j, "t2_star_us", where) * 1e-6;
    return p;
}

inline device::DeviceModel parse_device(const json& j) {
    reject_unknown_keys(j,
                        {"schema_version", "notes", "q1", "q2", "coupler", "g12_mhz", "levels_per_mode",
                         "zz_term_khz"},
                        "device config");
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ConfigError("device config: schema_version must be 1");
    device::DeviceModel m;
    m.q1 = parse_transmon(j.at("q1"), "q1");
    m.q2 = parse_transmon(j.at("q2"), "q2");
    const json& tc = j.at("coupler");
    reject_unknown_keys(tc,
                        {"max_frequency_ghz", "anharmonicity_mhz", "asymmetry", "dc_flux",
                         "t1_us", "t2_star_us"},
                        "coupler");
    m.tc.max_frequency_hz = require_number(tc, "max_frequency_ghz", "coupler") * 1e9;
    m.tc.anharmonicity_hz = require_number(tc, "anharmonicity_mhz", "coupler") * 1e6;
    m.tc.asymmetry = require_number(tc, "asymmetry", "coupler");
    m.tc.dc_flux = require_number(tc, "dc_flux", "coupler");
    m.tc.t1_s = require_number(tc, "t1_us", "coupler") * 1e-6;
    m.tc.t2_star_s = require_number(tc, "t2_star_us", "coupler") * 1e-6;
    if (j.contains("g12_mhz")) m.g12_hz = j["g12_mhz"].get<double>() * 1e6;
    if (j.contains("levels_per_mode")) m.levels_per_mode = j["levels_per_mode"].get<int>();
    if (j.contains("zz_term_khz")) m.zz_term_hz = j["zz_term_khz"].get<double>() * 1e3;
    m.validate();
    return m;
}

inline device::DeviceModel load_device(const std::filesystem::path& path) {
    return parse_device(load_json_file(path));
}

// ---------------------------------------------------------------------------
// Experiment config
// ---------------------------------------------------------------------------

enum class Backend { Simple, Full };
enum class Gate { CZ, ISwap };

struct ExperimentConfig {
    json raw;
    Backend backend = Backend::Simple;
    Gate gate = Gate::CZ;
    uint64_t seed = 0;
    std::string output_dir = "out";

    // device (for the full backend); simple-model noise otherwise
    std::optional<device::DeviceModel> device_model;
    gates::SimpleNoiseModel noise;
    std::optional<noise::PhaseJitterModel> jitter;

    // rb section
    std::vector<int> lengths{1, 2, 4, 8, 16, 32, 64};
    int n_random = 10;
    int shots = 0;  // 0 = exact expectation values

    // calibration / sweep knobs
    double amplitude = 0.1;
    std::vector<double> sweep_values;
    std::string sweep_parameter;
    std::vector<int> histogram_lengths{2, 8, 16};
};

inline ExperimentConfig parse_experiment(const json& j, const std::filesystem::path& base_dir) {
    reject_unknown_keys(j,
                        {"schema_version", "notes", "backend", "gate", "seed", "output_dir", "device",
                         "noise", "rb", "calibration", "sweep", "histogram"},
                        "experiment config");
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ConfigError("experiment config: schema_version must be 1");
    ExperimentConfig c;
    c.raw = j;
    std::string backend = j.value("backend", "simple");
    if (backend == "simple")
        c.backend = Backend::Simple;
    else if (backend == "full")
        c.backend = Backend::Full;
    else
        throw ConfigError("backend must be 'simple' or 'full'");
    std::string gate = j.value("gate", "cz");
    if (gate == "cz")
        c.gate = Gate::CZ;
    else if (gate == "iswap")
        c.gate = Gate::ISwap;
    else
        throw ConfigError("gate must be 'cz' or 'iswap'");
    if (!j.contains("seed")) throw ConfigError("experiment config: seed is mandatory");
    c.seed = j["seed"].get<uint64_t>();
    c.output_dir = j.value("output_dir", "out");

    if (j.contains("device")) {
        const json& d = j["device"];
        if (d.is_string()) {
            std::filesystem::path p = d.get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            c.device_model = load_device(p);
        } else {
            c.device_model = parse_device(d);
        }
    }

    if (j.contains("noise")) {
        const json& n = j["noise"];
        reject_unknown_keys(n,
                            {"t1_us", "t2_star_us", "zeta_khz", "tau_2q_ns", "tau_1q_ns",
                             "jitter"},
                            "noise");
        if (n.contains("t1_us")) {
            c.noise.t1 = {n["t1_us"].at(0).get<double>() * 1e-6,
                          n["t1_us"].at(1).get<double>() * 1e-6};
        }
        if (n.contains("t2_star_us")) {
            c.noise.t2_star = {n["t2_star_us"].at(0).get<double>() * 1e-6,
                               n["t2_star_us"].at(1).get<double>() * 1e-6};
        }
        if (n.contains("zeta_khz")) c.noise.zeta_hz = n["zeta_khz"].get<double>() * 1e3;
        if (n.contains("tau_2q_ns")) c.noise.tau_2q = n["tau_2q_ns"].get<double>() * 1e-9;
        if (n.contains("tau_1q_ns")) c.noise.tau_1q = n["tau_1q_ns"].get<double>() * 1e-9;
        if (n.contains("jitter")) {
            const json& jt = n["jitter"];
            reject_unknown_keys(jt, {"sideband_mhz", "clock_period_ps", "max_cycles", "per_gate"},
                                "noise.jitter");
            noise::PhaseJitterModel m;
            m.sideband_hz = require_number(jt, "sideband_mhz", "jitter") * 1e6;
            if (jt.contains("clock_period_ps"))
                m.clock_period = jt["clock_period_ps"].get<double>() * 1e-12;
            if (jt.contains("max_cycles")) m.max_cycles = jt["max_cycles"].get<int>();
            if (jt.contains("per_gate")) m.per_gate = jt["per_gate"].get<bool>();
            c.jitter = m;
        }
        c.noise.validate();
    }

    if (j.contains("rb")) {
        const json& r = j["rb"];
        reject_unknown_keys(r, {"lengths", "n_random", "shots"}, "rb");
        if (r.contains("lengths")) c.lengths = r["lengths"].get<std::vector<int>>();
        if (r.contains("n_random")) c.n_random = r["n_random"].get<int>();
        if (r.contains("shots")) c.shots = r["shots"].get<int>();
    }

    if (j.contains("calibration")) {
        const json& cal = j["calibration"];
        reject_unknown_keys(cal, {"amplitude"}, "calibration");
        if (cal.contains("amplitude")) c.amplitude = cal["amplitude"].get<double>();
    }

    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        reject_unknown_keys(s, {"parameter", "values"}, "sweep");
        c.sweep_parameter = s.value("parameter", "");
        if (s.contains("values")) c.sweep_values = s["values"].get<std::vector<double>>();
    }

    if (j.contains("histogram")) {
        const json& hist = j["histogram"];
        reject_unknown_keys(hist, {"lengths"}, "histogram");
        if (hist.contains("lengths")) c.histogram_lengths = hist["lengths"].get<std::vector<int>>();
    }
    return c;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
    return parse_experiment(load_json_file(path), path.parent_path());
}

}  // namespace qgate::config
