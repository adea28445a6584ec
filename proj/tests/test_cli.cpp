#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"

using namespace bosatom::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("bosatom-cli-test-" + name);
  fs::remove_all(p);
  return p;
}

Outcome run_flat(Command c, json flat) {
  std::ostringstream log;
  return run(resolve(c, flat), flat, log);
}

}  // namespace

TEST_CASE("defaults resolve") {
  const auto c = resolve(Command::Solve, default_config_json());
  CHECK(c.params.lambda == 1.0);
  CHECK(c.grid.n_r == 129);
  CHECK(c.grid.n_z == 257);
  CHECK(c.solver.tol == 1e-6);
}

TEST_CASE("config merging is strict") {
  json base = default_config_json();
  merge_config(base, json{{"grid", {{"nr", 65}}}, {"lambda", 0.5}}, "test");
  CHECK(base["grid.nr"] == 65);
  CHECK(base["lambda"] == 0.5);
  CHECK_THROWS_AS(merge_config(base, json{{"lamda", 1}}, "test"), ConfigError);
  CHECK_THROWS_AS(merge_config(base, json{{"lambda", "one"}}, "test"), ConfigError);
  CHECK_THROWS_AS(merge_config(base, json::array(), "test"), ConfigError);
}

TEST_CASE("assignments parse as JSON or strings") {
  CHECK(parse_assignment("lambda=0.25").second == 0.25);
  CHECK(parse_assignment("scan.values=[1,2]").second == json::array({1, 2}));
  CHECK(parse_assignment("out=some/dir").second == "some/dir");
  CHECK_THROWS_AS(parse_assignment("novalue"), ConfigError);
  CHECK_THROWS_AS(parse_assignment("=3"), ConfigError);
}

TEST_CASE("invalid values are config errors") {
  auto bad = [](const std::string& key, json v) {
    json f = default_config_json();
    f[key] = v;
    return f;
  };
  CHECK_THROWS_AS(resolve(Command::Solve, bad("lambda", -1.0)), ConfigError);
  CHECK_THROWS_AS(resolve(Command::Solve, bad("grid.nz", 256)), ConfigError);
  CHECK_THROWS_AS(resolve(Command::Solve, bad("grid.nr", 12.5)), ConfigError);
  CHECK_THROWS_AS(resolve(Command::Solve, bad("solver.init", "zero")), ConfigError);
  CHECK_THROWS_AS(resolve(Command::Confined, bad("beta", 0.0)), ConfigError);
  CHECK_THROWS_AS(resolve(Command::ScanBeta, bad("scan.mode", "huge")), ConfigError);
  CHECK_THROWS_AS(parse_command("frobnicate"), ConfigError);
  CHECK(parse_command("scaling-audit") == Command::ScalingAudit);
}

TEST_CASE("hs command writes tables and echoes the config") {
  const auto dir = scratch("hs");
  json f = default_config_json();
  f["lambda"] = 2.0;
  f["out"] = dir.string();
  const auto o = run_flat(Command::Hs, f);
  CHECK(o.exit_code == kOk);
  CHECK(o.summary["config"] == f);
  CHECK(std::abs(o.summary["result"]["exact_energy"].get<double>() + 1.0 / 6.0) <= 1e-6);
  for (const char* file : {"summary.json", "hs_profile.csv", "hs_energy.csv", "checks.csv"})
    CHECK(fs::exists(dir / file));
  std::ifstream in(dir / "summary.json");
  CHECK(json::parse(in)["status"] == "ok");
  fs::remove_all(dir);
}

TEST_CASE("solve command dumps a density that re-evaluates identically") {
  const auto dir = scratch("solve");
  json f = default_config_json();
  f["out"] = dir.string();
  const auto o = run_flat(Command::Solve, f);
  CHECK(o.exit_code == kOk);
  const double e = o.summary["result"]["energy"]["E"];
  CHECK(e >= -0.25);
  CHECK(e <= -0.0625);
  bool roundtrip = false;
  for (const auto& c : o.summary["checks"])
    if (c["name"] == "density_roundtrip") roundtrip = c["pass"];
  CHECK(roundtrip);
  CHECK(fs::exists(dir / "density.txt"));
  CHECK(fs::exists(dir / "solution.csv"));
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  json f = default_config_json();
  f["grid.nr"] = 33;
  f["grid.nz"] = 65;
  f["solver.max_iter"] = 2;
  f["out"] = dir.string();
  auto o = run_flat(Command::Solve, f);
  CHECK(o.exit_code == kNotConverged);
  CHECK(o.summary["error"]["kind"] == "not-converged");

  // strong-field ladder whose gap grows
  f = default_config_json();
  f["scan.values"] = json::array({100.0, 1000.0});
  f["out"] = dir.string();
  o = run_flat(Command::ScanBeta, f);
  CHECK(o.exit_code == kCheckFailed);
  CHECK(o.summary["error"]["kind"] == "check-failed");

  // output path below a regular file
  std::ofstream(dir / "file") << "x";
  f = default_config_json();
  f["out"] = (dir / "file" / "sub").string();
  o = run_flat(Command::Hs, f);
  CHECK(o.exit_code == kConfigError);
  CHECK(o.summary["error"]["kind"] == "config");
  fs::remove_all(dir);
}
