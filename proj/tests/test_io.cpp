#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "slabkin/config.hpp"
#include "slabkin/slab.hpp"
#include "slabkin/trajectory_io.hpp"

using namespace slabkin;
namespace fs = std::filesystem;

namespace {

const char* kMinimal =
    R"({"modes": [[0, 0]], "velocity": {"n": 8, "vmax": 5}, "dt": 0.01,
        "t_end": 1, "nx": 32})";

fs::path tmpdir() {
  auto d = fs::temp_directory_path() / "slabkin-test-io";
  fs::create_directories(d);
  return d;
}

Trajectory sample_trajectory() {
  Trajectory tr;
  tr.k = {0.5, -0.25};
  tr.nx = 8;
  tr.dx = 0.25;
  tr.dt = 0.01;
  tr.probes = {0.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    TrajectorySample s;
    s.t = 0.1 * i + 1e-17;  // exercise full double round-trip
    s.l2_norm = 1.0 / (1.0 + i);
    s.micro_dissipation = 0.037 * i;
    s.boundary_dissipation = 1.5e-9 * i;
    s.energy_defect = -2.5e-13 * i;
    for (int p = 0; p < 2; ++p) {
      Moments m;
      m.a = {0.1 * i + p, -0.2};
      m.b[0] = {1e-16, 2.0};
      m.b[1] = {0.0, 0.0};
      m.b[2] = {3.25, -1.0 / 3.0};
      m.c = {-0.75, 0.125 * i};
      s.probe_moments.push_back(m);
    }
    tr.samples.push_back(s);
  }
  return tr;
}

}  // namespace

TEST_CASE("minimal config materializes defaults") {
  auto cfg = parse_config(kMinimal);
  CHECK(cfg.velocity.n == 8);
  CHECK(cfg.nx == 32);
  CHECK(cfg.output.cadence == 10);
  CHECK(cfg.stencil == "upwind");
  CHECK(cfg.theta == 0.1);
  CHECK_FALSE(cfg.nonlinear);

  auto man = config_manifest(cfg);
  CHECK(man.find("\"cadence\"") != std::string::npos);
}

TEST_CASE("config validation names the offending key") {
  // dt <= 0
  try {
    parse_config(R"({"modes": [[0,0]], "dt": -0.01, "t_end": 1})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("dt") != std::string::npos);
  }
  // unknown key
  try {
    parse_config(
        R"({"modes": [[0,0]], "dt": 0.01, "t_end": 1, "verbosity": 3})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("verbosity") != std::string::npos);
  }
  // CFL violation
  CHECK_THROWS_AS(parse_config(R"({"modes": [[0,0]], "dt": 0.05, "t_end": 1,
      "nx": 64, "velocity": {"n": 8, "vmax": 5}})"),
                  ConfigError);
  // missing required keys
  CHECK_THROWS_AS(parse_config(R"({"modes": [[0,0]], "t_end": 1})"),
                  ConfigError);
}

TEST_CASE("dotted overrides") {
  auto cfg = parse_config(kMinimal, {"velocity.n=12", "output.cadence=3"});
  CHECK(cfg.velocity.n == 12);
  CHECK(cfg.output.cadence == 3);
  CHECK(config_manifest(cfg).find("12") != std::string::npos);
  CHECK_THROWS_AS(parse_config(kMinimal, {"velocity.bogus=1"}), ConfigError);
}

TEST_CASE("trajectory round trip is field-exact") {
  auto tr = sample_trajectory();
  auto path = (tmpdir() / "tr.csv").string();
  write_trajectory(tr, path);
  auto back = read_trajectory(path);
  CHECK_FALSE(back.hash_mismatch);
  REQUIRE(back.t.size() == 3);
  CHECK(back.k1 == 0.5);
  CHECK(back.k2 == -0.25);
  REQUIRE(back.probes.size() == 2);
  for (int i = 0; i < 3; ++i) {
    CHECK(back.t[i] == tr.samples[i].t);
    CHECK(back.l2_norm[i] == tr.samples[i].l2_norm);
    CHECK(back.micro_dissipation[i] == tr.samples[i].micro_dissipation);
    CHECK(back.boundary_dissipation[i] == tr.samples[i].boundary_dissipation);
    CHECK(back.energy_defect[i] == tr.samples[i].energy_defect);
    // probe columns, CSV order: a, b1, b2, b3, c re/im per probe
    CHECK(back.probe_columns[0][i] == tr.samples[i].probe_moments[0].a.real());
    CHECK(back.probe_columns[7][i] ==
          tr.samples[i].probe_moments[0].b[2].imag());
    CHECK(back.probe_columns[18][i] ==
          tr.samples[i].probe_moments[1].c.real());
  }
}

TEST_CASE("trajectory error paths") {
  auto tr = sample_trajectory();
  auto dir = tmpdir();

  // truncated file: error message carries the line number
  auto p1 = (dir / "trunc.csv").string();
  write_trajectory(tr, p1);
  {
    std::ifstream in(p1);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string body = ss.str();
    body = body.substr(0, body.rfind("0.2"));
    std::ofstream out(p1, std::ios::binary);
    out << body;
  }
  try {
    read_trajectory(p1);
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }

  // hash mismatch: flagged, not fatal
  auto p2 = (dir / "hash.csv").string();
  write_trajectory(tr, p2);
  {
    std::ofstream out(p2, std::ios::app);
    out << "";  // keep rows intact; instead tamper one digit
  }
  {
    std::ifstream in(p2);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string body = ss.str();
    auto pos = body.find("0.0369");  // 0.037 in %.17g
    REQUIRE(pos != std::string::npos);
    body[pos] = '1';
    std::ofstream out(p2, std::ios::binary);
    out << body;
  }
  CHECK(read_trajectory(p2).hash_mismatch);

  // version mismatch in the manifest is fatal
  auto p3 = (dir / "ver.csv").string();
  write_trajectory(tr, p3);
  {
    std::ifstream in(p3 + ".manifest.json");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string man = ss.str();
    auto pos = man.find(kVersion);
    REQUIRE(pos != std::string::npos);
    man.replace(pos, std::string(kVersion).size(), "9.9.9");
    std::ofstream out(p3 + ".manifest.json", std::ios::binary);
    out << man;
  }
  CHECK_THROWS(read_trajectory(p3));
}

TEST_CASE("snapshot round trip") {
  Snapshot s;
  s.t = 0.375;
  s.k = {1.0, -2.0};
  s.values = Eigen::MatrixXcd::Random(24, 6);
  auto path = (tmpdir() / "snap.bin").string();
  write_snapshot(s, path);
  auto back = read_snapshot(path);
  CHECK(back.t == s.t);
  CHECK(back.k == s.k);
  CHECK((back.values - s.values).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS(read_snapshot((tmpdir() / "missing.bin").string()));

  // truncation detected
  auto p2 = (tmpdir() / "snap2.bin").string();
  write_snapshot(s, p2);
  fs::resize_file(p2, fs::file_size(p2) - 16);
  CHECK_THROWS(read_snapshot(p2));
}
