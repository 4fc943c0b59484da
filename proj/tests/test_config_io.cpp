#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.h"
#include "laval/config.h"
#include "laval/errors.h"
#include "laval/io.h"
#include "laval/pipeline.h"

using namespace laval;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("laval_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const RunConfig d = parse_config("");
  CHECK(d.gamma == 1.4);
  CHECK(d.mode == RunMode::transonic);
  CHECK(d.fit_lo == 1.0 / 16.0);
  const RunConfig c = parse_config(R"(
[gas]
gamma = 1.3
[nozzle]
delta = 0.05
[subsonic]
n_phi = 64
[supersonic]
phi_ratio = 1.05
[run]
mode = "subsonic"
)");
  CHECK(c.gamma == 1.3);
  CHECK(c.nozzle.delta == 0.05);
  CHECK(c.subsonic.n_phi == 64);
  CHECK(c.supersonic.phi_ratio == 1.05);
  CHECK(c.mode == RunMode::subsonic);
  // Integers are accepted for real-valued keys.
  CHECK(parse_config("[nozzle]\nf0 = 2\n").nozzle.f0 == 2.0);
}

TEST_CASE("config errors name the offending key") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[subsonic]\ntol_outer = -1e-8\n").find("subsonic.tol_outer") != std::string::npos);
  CHECK(message("[subsonic]\nn_psi = 4\n").find("grid") != std::string::npos);
  CHECK(message("[nozzle]\nbogus = 1\n").find("bogus") != std::string::npos);
  CHECK(message("[extra]\nx = 1\n").find("extra") != std::string::npos);
  CHECK(message("[run]\nmode = \"fast\"\n").find("mode") != std::string::npos);
  CHECK(message("[run]\nlevels = 2\n").find("levels") != std::string::npos);
  CHECK(message("[gas]\ngamma = \"x\"\n").find("gamma") != std::string::npos);
  CHECK(message("[run]\nmode = \"analyze\"\n").find("field") != std::string::npos);
  CHECK_FALSE(message("not toml ===").empty());
}

TEST_CASE("config round-trips through JSON") {
  const RunConfig c = fixtures::coarse();
  const nlohmann::json j = config_to_json(c);
  CHECK(j["subsonic"]["n_phi"] == 32);
  CHECK(j["run"]["mode"] == "transonic");
  CHECK(j["nozzle"]["delta"] == 0.1);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
  }
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("potential CSV round-trip and malformed input") {
  const fs::path dir = scratch_dir("csv");
  PotentialField f;
  f.phi = {-0.1, 0.0, 0.2};
  f.psi = {0.0, 0.5};
  f.q = Field2D(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) f.q(i, j) = 0.9 + 0.01 * i + 0.001 * j;
  write_text((dir / "f.csv").string(), potential_csv(f));
  const PotentialField g = read_potential_csv((dir / "f.csv").string());
  CHECK(g.phi == f.phi);
  CHECK(g.psi == f.psi);
  CHECK(g.q.data() == f.q.data());

  write_text((dir / "bad1.csv").string(), "phi,psi\n0,0\n");
  CHECK_THROWS_AS(read_potential_csv((dir / "bad1.csv").string()), DomainError);
  write_text((dir / "bad2.csv").string(), "phi,psi,q\n0,0,1\n1,0,1\n0,1,1\n");
  CHECK_THROWS_AS(read_potential_csv((dir / "bad2.csv").string()), DomainError);
  write_text((dir / "bad3.csv").string(), "phi,psi,q\n0,0,1\n1,0,x\n0,1,1\n1,1,1\n");
  CHECK_THROWS_AS(read_potential_csv((dir / "bad3.csv").string()), DomainError);
  write_text((dir / "bad4.csv").string(), "phi,psi,q\n0,0,1\n0,0,1\n0,1,1\n1,1,1\n");
  CHECK_THROWS_AS(read_potential_csv((dir / "bad4.csv").string()), DomainError);
}

TEST_CASE("manifest digest") {
  const fs::path dir = scratch_dir("digest");
  write_text((dir / "a.txt").string(), "a");
  CHECK(file_digest((dir / "a.txt").string()) == "af63dc4c8601ec8c");
}

TEST_CASE("subsonic run on the straight channel writes a uniform field") {
  RunConfig c = fixtures::coarse(0.0);
  c.mode = RunMode::subsonic;
  const fs::path dir = scratch_dir("straight");
  const nlohmann::json report = run_pipeline(c, dir.string(), false);
  CHECK(report["mode"] == "subsonic");
  const GasModel gas(c.gamma);
  std::istringstream in(slurp(dir / "subsonic.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "phi,psi,q");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::strtod(line.substr(line.rfind(',') + 1).c_str(), nullptr) == gas.c_star());
    ++rows;
  }
  CHECK(rows == 33 * 9);
  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  for (const auto& e : manifest["files"]) {
    CHECK(fs::file_size(dir / e["name"].get<std::string>()) == e["bytes"].get<uintmax_t>());
  }
}

TEST_CASE("identical configs give byte-identical artifacts") {
  RunConfig c = fixtures::coarse();
  c.mode = RunMode::transonic;
  const fs::path a = scratch_dir("stable_a"), b = scratch_dir("stable_b");
  run_pipeline(c, a.string(), false);
  run_pipeline(c, b.string(), false);
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  const nlohmann::json fits = nlohmann::json::parse(slurp(a / "fits.json"));
  CHECK(fits.size() == 5);
}

TEST_CASE("dump writes per-iteration snapshots") {
  RunConfig c = fixtures::coarse();
  c.mode = RunMode::subsonic;
  const fs::path dir = scratch_dir("dump");
  run_pipeline(c, dir.string(), true);
  CHECK(fs::exists(dir / "iterations" / "subsonic_0001.csv"));
  CHECK(fs::exists(dir / "iterations" / "subsonic_0001.json"));
}

TEST_CASE("straight channel runs although it fails the curvature conditions") {
  RunConfig c = fixtures::coarse(0.0);
  c.mode = RunMode::subsonic;
  const fs::path dir = scratch_dir("admissibility");
  const nlohmann::json report = run_pipeline(c, dir.string(), false);
  bool inlet_failed = false;
  for (const auto& cond : report["admissibility"]["conditions"]) {
    if (cond["name"] == "inlet_curvature") inlet_failed = !cond["passed"].get<bool>();
  }
  CHECK(inlet_failed);
}

TEST_CASE("straight-channel convergence study is exact") {
  RunConfig c = fixtures::coarse(0.0);
  c.study = RunMode::transonic;
  const ConvergenceTable t = convergence_study(c, 3);
  CHECK(t.exact);
  CHECK(t.passed);
  CHECK(convergence_json(t)["order_sub"] == "exact");
  CHECK_THROWS_AS(convergence_study(c, 2), ConfigError);
}

TEST_CASE("refined config doubles the grids") {
  const RunConfig c = fixtures::coarse();
  const RunConfig r = refined_config(c, 2);
  CHECK(r.subsonic.n_phi == 128);
  CHECK(r.subsonic.n_psi == 32);
  CHECK(r.supersonic.n_psi == 32);
  CHECK(r.supersonic.eps_fraction == doctest::Approx(c.supersonic.eps_fraction / 4));
}
