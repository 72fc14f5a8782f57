#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "ncwit/cli.hpp"
#include "ncwit/gaussian.hpp"
#include "ncwit/json_io.hpp"

using namespace ncwit;
using namespace testutil;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream o, e;
  CliResult r;
  r.code = run_cli(args, o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

const std::filesystem::path& fixture_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "ncwit_cli_fixtures";
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_fixture(const std::string& name, const std::string& content) {
  const auto path = fixture_dir() / name;
  std::ofstream f(path, std::ios::binary);
  f << content;
  return path.string();
}

std::string write_state(const std::string& name, const json& j) {
  return write_fixture(name, j.dump(2) + "\n");
}

std::string squeezed_file() {
  static const std::string path =
      write_state("squeezed.json", state_to_json(to_normal(squeezed_vacuum(0.5))));
  return path;
}

std::string twin_file() {
  static const std::string path =
      write_state("twin.json", state_to_json(to_normal(twin_beam(0.3))));
  return path;
}

double frozen_twin_poly(double x) {
  return ((frozen::kTwin03A * x + frozen::kTwin03B) * x + frozen::kTwin03C) * x +
         frozen::kTwin03D;
}

}  // namespace

TEST_CASE("validate reports physicality and classicality") {
  const std::string vac =
      write_state("vacuum.json", state_to_json(QuadratureState::vacuum(1)));
  CliResult r = run({"validate", "--input", vac});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["modes"] == 1);
  CHECK(j["representation"] == "quadrature");
  CHECK(j["physical"] == true);
  CHECK(j["classical"] == true);
  CHECK(std::abs(j["physical_margin"].get<double>()) < 1e-12);
  REQUIRE(j["symplectic_eigenvalues"].is_array());
  CHECK(j["symplectic_eigenvalues"][0].get<double>() ==
        Catch::Approx(0.5).margin(1e-12));

  r = run({"validate", "--input", squeezed_file()});
  REQUIRE(r.code == kExitOk);
  const json js = json::parse(r.out);
  CHECK(js["physical"] == true);
  CHECK(js["classical"] == false);
  const double expected_margin =
      std::sinh(0.5) * std::sinh(0.5) - std::sinh(0.5) * std::cosh(0.5);
  CHECK(js["classical_margin"].get<double>() ==
        Catch::Approx(expected_margin).margin(1e-10));

  const std::string bad = write_state(
      "unphysical.json",
      state_to_json(QuadratureState(Eigen::MatrixXd::Identity(2, 2) * 0.3)));
  r = run({"validate", "--input", bad});
  REQUIRE(r.code == kExitValidation);
  const json jb = json::parse(r.out);
  CHECK(jb["physical"] == false);
  CHECK(jb["physical_margin"].get<double>() == Catch::Approx(-0.2).margin(1e-10));
  CHECK(jb["symplectic_eigenvalues"].is_null());
}

TEST_CASE("analyze on a squeezed state pins the cubic and detection") {
  const CliResult r = run({"analyze", "--input", squeezed_file(), "--modes", "0"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["witness"] == "R");
  CHECK(j["strategy"] == "R");
  CHECK(j["modes"] == json::array({0}));
  CHECK(j["polynomial"]["a"].get<double>() ==
        Catch::Approx(frozen::kSq05A).margin(1e-10));
  CHECK(j["polynomial"]["b"].get<double>() ==
        Catch::Approx(frozen::kSq05B).margin(1e-10));
  CHECK(j["polynomial"]["c"].get<double>() ==
        Catch::Approx(frozen::kSq05C).margin(1e-10));
  CHECK(j["polynomial"]["d"].get<double>() ==
        Catch::Approx(frozen::kSq05D).margin(1e-10));
  CHECK(j["x_critical"].get<double>() ==
        Catch::Approx(frozen::kSq05Xcr).margin(1e-8));
  CHECK(j["x"].get<double>() ==
        Catch::Approx(2 * frozen::kSq05Xcr).margin(1e-8));
  CHECK(j["detected"] == true);
  CHECK(j["value"].get<double>() < 0.0);
  const double gap = std::sinh(0.5) * std::cosh(0.5) - std::sinh(0.5) * std::sinh(0.5);
  CHECK(j["gap"].get<double>() == Catch::Approx(gap).margin(1e-10));

  // Explicit strength request is honored.
  const CliResult rx =
      run({"analyze", "--input", squeezed_file(), "--modes", "0", "--x", "0.25"});
  REQUIRE(rx.code == kExitOk);
  const json jx = json::parse(rx.out);
  CHECK(jx["x"].get<double>() == Catch::Approx(0.25).margin(1e-12));
  const double expect = ((frozen::kSq05A * 0.25 + frozen::kSq05B) * 0.25 +
                         frozen::kSq05C) *
                            0.25 +
                        frozen::kSq05D;
  CHECK(jx["value"].get<double>() == Catch::Approx(expect).margin(1e-9));
}

TEST_CASE("hand-written pair-key state file drives the two-mode witness") {
  const std::string path = write_fixture("pair.json", R"({
    "modes": 2,
    "representation": "normal",
    "B": [0.4, 0.7],
    "C": [[0.0, 0.1], [-0.2, 0.0]],
    "D": {"0,1": [0.25, 0.1]},
    "Dbar": {"0,1": [-0.15, 0.05]}
  })");
  const CliResult r = run({"analyze", "--input", path, "--modes", "0,1", "--phases",
                           "0.3,-1.1"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["witness"] == "M");
  CHECK(j["phases"][0].get<double>() == Catch::Approx(0.3).margin(1e-12));
  CHECK(j["phases"][1].get<double>() == Catch::Approx(-1.1).margin(1e-12));
  CHECK(j["polynomial"]["a"].get<double>() ==
        Catch::Approx(frozen::kPairA).margin(1e-10));
  CHECK(j["polynomial"]["b"].get<double>() ==
        Catch::Approx(frozen::kPairB).margin(1e-10));
  CHECK(j["polynomial"]["c"].get<double>() ==
        Catch::Approx(frozen::kPairC).margin(1e-10));
  CHECK(j["polynomial"]["d"].get<double>() ==
        Catch::Approx(frozen::kPairD).margin(1e-10));
}

TEST_CASE("single-mode phase override reproduces the frozen displaced cubic") {
  const std::string path = write_state("dispstate.json", state_to_json(disp_state_cm()));
  const CliResult r =
      run({"analyze", "--input", path, "--modes", "0", "--phases", "0.7"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["polynomial"]["a"].get<double>() ==
        Catch::Approx(frozen::kDispA).margin(1e-10));
  CHECK(j["polynomial"]["b"].get<double>() ==
        Catch::Approx(frozen::kDispBB).margin(1e-10));
  CHECK(j["polynomial"]["c"].get<double>() ==
        Catch::Approx(frozen::kDispC).margin(1e-10));
  CHECK(j["polynomial"]["d"].get<double>() ==
        Catch::Approx(frozen::kDispD).margin(1e-10));
}

TEST_CASE("identical invocations produce byte-identical output") {
  const std::vector<std::string> args = {"analyze", "--input", squeezed_file(),
                                         "--modes", "0"};
  const CliResult a = run(args);
  const CliResult b = run(args);
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);

  const std::vector<std::string> vargs = {"verify",    "--input", squeezed_file(),
                                          "--samples", "20000",   "--seed",
                                          "31415"};
  const CliResult va = run(vargs);
  const CliResult vb = run(vargs);
  CHECK(va.code == vb.code);
  CHECK(va.out == vb.out);
}

TEST_CASE("scan emits a CSV grid matching the frozen twin-beam cubic") {
  const CliResult r = run({"scan", "--input", twin_file(), "--modes", "0,1",
                           "--grid", "0:2:5"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find('\r') == std::string::npos);

  std::istringstream lines(r.out);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "x,value,detected");
  const double xs[] = {0.0, 0.5, 1.0, 1.5, 2.0};
  for (double expected_x : xs) {
    REQUIRE(std::getline(lines, line));
    std::string fx, fv, fd;
    std::istringstream cells(line);
    REQUIRE(std::getline(cells, fx, ','));
    REQUIRE(std::getline(cells, fv, ','));
    REQUIRE(std::getline(cells, fd, ','));
    CHECK(std::stod(fx) == Catch::Approx(expected_x).margin(1e-12));
    CHECK(close(std::stod(fv), frozen_twin_poly(expected_x), 1e-8));
    CHECK(fd == "1");
  }
  CHECK_FALSE(std::getline(lines, line));
}

TEST_CASE("critical-xi reports strength, amplitude, and window") {
  const CliResult r =
      run({"critical-xi", "--input", squeezed_file(), "--modes", "0"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["witness"] == "R");
  CHECK(j["x_critical"].get<double>() ==
        Catch::Approx(frozen::kSq05Xcr).margin(1e-8));
  CHECK(j["xi_critical"].get<double>() ==
        Catch::Approx(std::sqrt(frozen::kSq05Xcr)).margin(1e-8));
  // Downward cubic: negativity extends to infinity, no bounded window.
  CHECK(j["negative_window"].is_null());
  CHECK(j["polynomial"]["a"].get<double>() ==
        Catch::Approx(frozen::kSq05A).margin(1e-10));
}

TEST_CASE("optimize returns the best phases and detection gap") {
  const CliResult r = run({"optimize", "--input", twin_file(), "--modes", "0,1"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["witness"] == "M");
  REQUIRE(j["phases"].size() == 2);
  CHECK(j["a"].get<double>() == Catch::Approx(frozen::kTwin03A).margin(1e-10));
  const double b = std::sinh(0.3) * std::sinh(0.3);
  const double d = std::sinh(0.3) * std::cosh(0.3);
  CHECK(j["gap"].get<double>() == Catch::Approx(2 * d - 2 * b).margin(1e-10));
  CHECK(j["detectable"] == true);
}

TEST_CASE("standard-form reduces a rotated twin beam") {
  Eigen::VectorXd phases(2);
  phases << 0.4, -0.9;
  const NormalCM rotated = phase_shift(to_normal(twin_beam(0.3)), phases);
  const std::string path = write_state("twin_rotated.json", state_to_json(rotated));
  const CliResult r = run({"standard-form", "--input", path});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  const double q = std::cosh(0.6) / 2;
  const double c = std::sinh(0.6) / 2;
  CHECK(j["q_j"].get<double>() == Catch::Approx(q).margin(1e-10));
  CHECK(j["q_l"].get<double>() == Catch::Approx(q).margin(1e-10));
  CHECK(j["q_jl"].get<double>() == Catch::Approx(c).margin(1e-10));
  CHECK(j["q_pjl"].get<double>() == Catch::Approx(-c).margin(1e-10));
  CHECK(j["duan_sum"].get<double>() == Catch::Approx(std::exp(-0.6)).margin(1e-10));
  CHECK(j["entangled_by_sum"] == true);
  CHECK(j["sigma_st"].size() == 4);

  // States with single-mode squeezing fall outside the supported reduction.
  const std::string pair = write_state("pair_prog.json", state_to_json(pair_state_cm()));
  CHECK(run({"standard-form", "--input", pair}).code == kExitValidation);
}

TEST_CASE("verify cross-checks the engine against all oracles") {
  const CliResult r = run({"verify", "--input", squeezed_file(), "--samples",
                           "50000", "--seed", "777"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["ok"] == true);
  CHECK(j["samples"] == 50000);
  CHECK(j["seed"] == 777);
  CHECK(j["cap"] == json::array({3}));
  REQUIRE(j["rows"].size() == 3);
  CHECK(j["max_pairing_rel_err"].get<double>() < 1e-9);
  CHECK(j["max_fd_rel_err"].get<double>() < 1e-6);
  CHECK(j["max_mc_sigmas"].get<double>() < 6.0);

  // Orders beyond the finite-difference table are rejected up front.
  CHECK(run({"verify", "--input", squeezed_file(), "--cap", "5"}).code == kExitIo);
}

TEST_CASE("output file writing matches stdout") {
  const auto out_path = fixture_dir() / "report.json";
  std::filesystem::remove(out_path);
  const CliResult direct =
      run({"analyze", "--input", squeezed_file(), "--modes", "0"});
  const CliResult filed = run({"analyze", "--input", squeezed_file(), "--modes", "0",
                               "--output", out_path.string()});
  REQUIRE(filed.code == kExitOk);
  CHECK(filed.out.empty());
  std::ifstream f(out_path, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  CHECK(buf.str() == direct.out);
}

TEST_CASE("parse and I/O failures exit with code 4") {
  CHECK(run({"analyze", "--modes", "0"}).code == kExitIo);  // missing --input
  CHECK(run({"validate", "--input", "/nonexistent/state.json"}).code == kExitIo);
  const std::string garbled = write_fixture("garbled.json", "{ not json");
  CHECK(run({"validate", "--input", garbled}).code == kExitIo);
  CHECK(run({"scan", "--input", twin_file(), "--modes", "0,1", "--grid", "5:1:3"})
            .code == kExitIo);
  CHECK(run({"frobnicate"}).code == kExitIo);
  CHECK(run({}).code == kExitIo);
  CHECK(run({"analyze", "--input", squeezed_file(), "--modes", "0", "--x", "-1"})
            .code == kExitIo);
  const std::string missing_field =
      write_fixture("missing_field.json", R"({"modes": 1, "representation": "normal"})");
  CHECK(run({"validate", "--input", missing_field}).code == kExitIo);
}

TEST_CASE("validation failures exit with code 2") {
  const std::string impossible = write_fixture(
      "impossible.json",
      R"({"modes": 1, "representation": "normal", "B": [-0.9], "C": [[0.0, 0.0]]})");
  CHECK(run({"validate", "--input", impossible}).code == kExitValidation);

  const std::string bad = write_state(
      "unphysical2.json",
      state_to_json(QuadratureState(Eigen::MatrixXd::Identity(2, 2) * 0.3)));
  CHECK(run({"analyze", "--input", bad, "--modes", "0"}).code == kExitValidation);
}

TEST_CASE("help requests succeed") {
  const CliResult top = run({"--help"});
  CHECK(top.code == kExitOk);
  CHECK(top.out.find("validate") != std::string::npos);
  const CliResult sub = run({"analyze", "--help"});
  CHECK(sub.code == kExitOk);
  CHECK_FALSE(sub.out.empty());
}
