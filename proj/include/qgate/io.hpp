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
#include <string>
#include <vector>

#include <json.hpp>

#include "qgate/errors.hpp"

// Deterministic output plumbing: CSV tables, JSON reports, minimal
// self-contained SVG line plots, and the run manifest. Numeric formatting
// is fixed so byte-identical reruns are possible.

namespace qgate::io {

using json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::string serialize() const {
        std::string out;
        for (size_t i = 0; i < header.size(); ++i) {
            out += header[i];
            out += (i + 1 == header.size()) ? "\n" : ",";
        }
        for (const auto& row : rows) {
            for (size_t i = 0; i < row.size(); ++i) {
                out += format_double(row[i]);
                out += (i + 1 == row.size()) ? "\n" : ",";
            }
        }
        return out;
    }
};

/// Writes a file atomically (temp + rename).
inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot write " + tmp.string());
        f << content;
    }
    std::filesystem::rename(tmp, path);
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    write_file(path, table.serialize());
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Config hashing
// ---------------------------------------------------------------------------

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const json& config) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)fnv1a(config.dump()));
    return buf;
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct RunManifest {
    std::string tool_version;
    std::string config_hash;
    double wall_time_s = 0.0;
    std::vector<std::string> outputs;

    json to_json() const {
        json j;
        j["tool_version"] = tool_version;
        j["config_hash"] = config_hash;
        j["wall_time_s"] = wall_time_s;  // excluded from reproducibility checks
        j["outputs"] = outputs;
        return j;
    }
};

/// Written atomically at run end.
inline void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
    write_json(dir / "manifest.json", manifest.to_json());
}

// ---------------------------------------------------------------------------
// Minimal SVG line plots
// ---------------------------------------------------------------------------

struct SvgSeries {
    std::vector<double> x, y;
    std::string color = "#4363d8";
};

/// Self-contained SVG with linearly scaled axes and tick labels; enough for
/// decay curves and sweeps without a plotting dependency.
inline std::string render_svg(const std::vector<SvgSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
    const double w = 640, h = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1;
    if (!(ymax > ymin)) ymax = ymin + 1;
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto sy = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(w) +
           "\" height=\"" + format_double(h) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + format_double(w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
           title + "</text>\n";
    // axes
    svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(h - mb) + "\" x2=\"" +
           format_double(w - mr) + "\" y2=\"" + format_double(h - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(mt) + "\" x2=\"" +
           format_double(ml) + "\" y2=\"" + format_double(h - mb) + "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double xv = xmin + (xmax - xmin) * k / 4, yv = ymin + (ymax - ymin) * k / 4;
        svg += "<text x=\"" + format_double(sx(xv)) + "\" y=\"" + format_double(h - mb + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + format_double(xv) + "</text>\n";
        svg += "<text x=\"" + format_double(ml - 8) + "\" y=\"" + format_double(sy(yv) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" + format_double(yv) + "</text>\n";
    }
    svg += "<text x=\"" + format_double((ml + w - mr) / 2) + "\" y=\"" + format_double(h - 12) +
           "\" text-anchor=\"middle\" font-size=\"13\">" + x_label + "</text>\n";
    svg += "<text x=\"18\" y=\"" + format_double((mt + h - mb) / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " +
           format_double((mt + h - mb) / 2) + ")\">" + y_label + "</text>\n";
    for (const auto& s : series) {
        std::string points;
        for (size_t i = 0; i < s.x.size(); ++i)
            points += format_double(sx(s.x[i])) + "," + format_double(sy(s.y[i])) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
        for (size_t i = 0; i < s.x.size(); ++i)
            svg += "<circle cx=\"" + format_double(sx(s.x[i])) + "\" cy=\"" +
                   format_double(sy(s.y[i])) + "\" r=\"2.5\" fill=\"" + s.color + "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace qgate::io
