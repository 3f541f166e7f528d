#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "qgate/config.hpp"
#include "qgate/io.hpp"

using namespace qgate;
namespace fs = std::filesystem;

namespace {

config::json minimal_experiment() {
    config::json j;
    j["schema_version"] = 1;
    j["backend"] = "simple";
    j["gate"] = "iswap";
    j["seed"] = 7;
    j["noise"] = {{"t1_us", {70, 23}}, {"t2_star_us", {50, 27}}, {"zeta_khz", -200},
                  {"tau_2q_ns", 200}};
    return j;
}

}  // namespace

TEST_CASE("experiment config parsing") {
    SUBCASE("round trip of a valid config") {
        auto c = config::parse_experiment(minimal_experiment(), ".");
        CHECK(c.gate == config::Gate::ISwap);
        CHECK(c.seed == 7);
        CHECK(c.noise.zeta_hz == doctest::Approx(-200e3));
        CHECK(c.noise.tau_2q == doctest::Approx(200e-9));
    }

    SUBCASE("unknown keys rejected") {
        auto j = minimal_experiment();
        j["frobnicate"] = 1;
        CHECK_THROWS_AS(config::parse_experiment(j, "."), ConfigError);
        j = minimal_experiment();
        j["noise"]["t2_echo_us"] = 3;
        CHECK_THROWS_AS(config::parse_experiment(j, "."), ConfigError);
    }

    SUBCASE("seed is mandatory") {
        auto j = minimal_experiment();
        j.erase("seed");
        CHECK_THROWS_AS(config::parse_experiment(j, "."), ConfigError);
    }

    SUBCASE("schema version enforced") {
        auto j = minimal_experiment();
        j["schema_version"] = 2;
        CHECK_THROWS_AS(config::parse_experiment(j, "."), ConfigError);
    }

    SUBCASE("invalid enum values") {
        auto j = minimal_experiment();
        j["backend"] = "quantum";
        CHECK_THROWS_AS(config::parse_experiment(j, "."), ConfigError);
    }
}

TEST_CASE("device config ships the published parameters") {
    fs::path path = fs::path(QGATE_CONFIG_DIR) / "device_paper.json";
    auto m = config::load_device(path);
    CHECK(m.q1.frequency_hz == doctest::Approx(5.089e9));
    CHECK(m.q2.frequency_hz == doctest::Approx(6.189e9));
    CHECK(m.tc.max_frequency_hz == doctest::Approx(8.1e9));
    CHECK(m.tc.dc_flux == doctest::Approx(0.15));
    CHECK(m.q1.t1_s == doctest::Approx(70e-6));
    CHECK(m.q2.t2_star_s == doctest::Approx(27e-6));
    // the calibrated direct coupling reproduces the measured static ZZ
    CHECK(device::static_zz_shift(m) == doctest::Approx(-202e3).epsilon(0.05));
}

TEST_CASE("csv serialization is deterministic") {
    io::CsvTable t;
    t.header = {"a", "b"};
    t.rows = {{1.0, 0.123456789012345}, {2.0, 3.5e-7}};
    std::string s1 = t.serialize();
    std::string s2 = t.serialize();
    CHECK(s1 == s2);
    CHECK(s1 == "a,b\n1,0.123456789012\n2,3.5e-07\n");
}

TEST_CASE("config hash is stable and key-order sensitive inputs avoided") {
    auto j = minimal_experiment();
    CHECK(io::config_hash(j) == io::config_hash(minimal_experiment()));
    j["seed"] = 8;
    CHECK(io::config_hash(j) != io::config_hash(minimal_experiment()));
}

TEST_CASE("atomic file writes and manifest") {
    fs::path dir = fs::temp_directory_path() / "qgate_io_test";
    fs::remove_all(dir);
    io::RunManifest m;
    m.tool_version = "test";
    m.config_hash = "deadbeef";
    m.outputs = {"a.csv"};
    io::write_manifest(dir, m);
    auto j = config::load_json_file(dir / "manifest.json");
    CHECK(j["config_hash"] == "deadbeef");
    CHECK(j["outputs"][0] == "a.csv");
    fs::remove_all(dir);
}

TEST_CASE("svg rendering produces a self-contained image") {
    io::SvgSeries s;
    s.x = {1, 2, 4, 8};
    s.y = {0.9, 0.8, 0.7, 0.5};
    std::string svg = io::render_svg({s}, "decay", "m", "F");
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}
