#include "config.hpp"

#include <fstream>
#include <sstream>

#include "bosatom/grid.hpp"

namespace bosatom::cli {

using nlohmann::json;

namespace {

const std::vector<std::pair<Command, std::string>> kCommands{
    {Command::Solve, "solve"},
    {Command::Hs, "hs"},
    {Command::Confined, "confined"},
    {Command::ScanBeta, "scan-beta"},
    {Command::ScanLambda, "scan-lambda"},
    {Command::Critical, "critical"},
    {Command::ScalingAudit, "scaling-audit"},
    {Command::Verify, "verify"},
};

void flatten(const json& j, const std::string& prefix, json& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      flatten(*it, key, out);
    else
      out[key] = *it;
  }
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

template <class T>
T get(const json& flat, const std::string& key) {
  try {
    return flat.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

int get_int(const json& flat, const std::string& key) {
  const json& v = flat.at(key);
  if (!v.is_number_integer() && !(v.is_number() && v.get<double>() == static_cast<int>(v.get<double>())))
    throw ConfigError("config key '" + key + "' must be an integer");
  return static_cast<int>(v.get<double>());
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [k, v] : kCommands)
    if (k == c) return v;
  return "?";
}

Command parse_command(const std::string& s) {
  for (const auto& [k, v] : kCommands)
    if (v == s) return k;
  throw ConfigError("unknown command '" + s + "'");
}

json default_config_json() {
  return json{
      {"lambda", 1.0},
      {"beta", 0.0},
      {"zeta", 1.0},
      {"alpha", 1.0},
      {"grid.rmax", 30.0},
      {"grid.zmax", 30.0},
      {"grid.nr", 129},
      {"grid.nz", 257},
      {"solver.tol", 1e-6},
      {"solver.energy_tol", 1e-10},
      {"solver.max_iter", 20000},
      {"solver.tau", 50.0},
      {"solver.init", "hydrogen-landau"},
      {"solver.seed", 1},
      {"solver.clamp", true},
      {"solver.critical_width", 0.01},
      {"solver.critical_ceiling", 0.0},
      {"hs.h0", 1e-3},
      {"hs.ratio", 1.02},
      {"hs.zmax", 1e4},
      {"confined.h0", 1e-3},
      {"confined.ratio", 1.03},
      {"confined.zmax", 400.0},
      {"scan.values", json::array()},
      {"scan.mode", "auto"},
      {"critical.betas", json::array()},
      {"checks.moment", false},
      {"checks.hydrogen", false},
      {"checks.derivative", false},
      {"output.density", true},
      {"jobs", 1},
      {"quick", false},
      {"out", "bosatom-out"},
  };
}

void merge_config(json& base, const json& overrides, const std::string& origin) {
  if (!overrides.is_object()) throw ConfigError(origin + ": config must be a JSON object");
  json flat = json::object();
  flatten(overrides, "", flat);
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    if (!base.contains(it.key())) throw ConfigError(origin + ": unknown config key '" + it.key() + "'");
    if (!same_kind(base[it.key()], *it))
      throw ConfigError(origin + ": config key '" + it.key() + "' expects " + base[it.key()].type_name() +
                        ", got " + it->type_name());
    base[it.key()] = *it;
  }
}

std::pair<std::string, json> parse_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + s + "'");
  const std::string key = s.substr(0, eq), text = s.substr(eq + 1);
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) v = text;
  return {key, v};
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  return j;
}

RunConfig resolve(Command command, const json& flat) {
  RunConfig c;
  c.command = command;
  c.params.lambda = get<double>(flat, "lambda");
  c.params.beta = get<double>(flat, "beta");
  c.params.zeta = get<double>(flat, "zeta");
  c.params.alpha = get<double>(flat, "alpha");
  try {
    c.params.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  c.grid.r_max = get<double>(flat, "grid.rmax");
  c.grid.z_max = get<double>(flat, "grid.zmax");
  c.grid.n_r = get_int(flat, "grid.nr");
  c.grid.n_z = get_int(flat, "grid.nz");
  try {
    Grid2D(c.grid.r_max, c.grid.z_max, c.grid.n_r, c.grid.n_z);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  c.solver.tol = get<double>(flat, "solver.tol");
  c.solver.energy_tol = get<double>(flat, "solver.energy_tol");
  c.solver.max_iter = get_int(flat, "solver.max_iter");
  c.solver.tau = get<double>(flat, "solver.tau");
  const auto init = get<std::string>(flat, "solver.init");
  require(init == "hydrogen-landau" || init == "random", "solver.init must be 'hydrogen-landau' or 'random'");
  c.solver.init = init == "random" ? InitialGuess::Random : InitialGuess::HydrogenLandau;
  const int seed = get_int(flat, "solver.seed");
  require(seed >= 0, "solver.seed must be nonnegative");
  c.solver.seed = static_cast<std::uint64_t>(seed);
  c.solver.clamp_overcritical = get<bool>(flat, "solver.clamp");
  c.solver.critical_width = get<double>(flat, "solver.critical_width");
  c.solver.critical_ceiling = get<double>(flat, "solver.critical_ceiling");
  require(c.solver.tol > 0.0 && c.solver.energy_tol > 0.0, "solver tolerances must be positive");
  require(c.solver.max_iter > 0, "solver.max_iter must be positive");
  require(c.solver.tau > 0.0, "solver.tau must be positive");
  require(c.solver.critical_width > 0.0, "solver.critical_width must be positive");
  require(c.solver.critical_ceiling >= 0.0, "solver.critical_ceiling must be nonnegative (0 = automatic)");

  c.hs_grid.h0 = get<double>(flat, "hs.h0");
  c.hs_grid.ratio = get<double>(flat, "hs.ratio");
  c.hs_grid.z_max = get<double>(flat, "hs.zmax");
  require(c.hs_grid.h0 > 0.0 && c.hs_grid.ratio >= 1.0 && c.hs_grid.z_max > 4.0 * c.hs_grid.h0,
          "hs grid needs h0 > 0, ratio >= 1, zmax > 4 h0");
  c.confined_grid.h0 = get<double>(flat, "confined.h0");
  c.confined_grid.ratio = get<double>(flat, "confined.ratio");
  c.confined_grid.z_max = get<double>(flat, "confined.zmax");
  require(c.confined_grid.h0 > 0.0 && c.confined_grid.ratio >= 1.0 &&
              c.confined_grid.z_max > 4.0 * c.confined_grid.h0,
          "confined grid needs h0 > 0, ratio >= 1, zmax > 4 h0");

  c.scan_values = get<std::vector<double>>(flat, "scan.values");
  c.scan_mode = get<std::string>(flat, "scan.mode");
  require(c.scan_mode == "auto" || c.scan_mode == "small" || c.scan_mode == "large" || c.scan_mode == "grid",
          "scan.mode must be one of auto, small, large, grid");
  c.critical_betas = get<std::vector<double>>(flat, "critical.betas");
  for (double b : c.critical_betas) require(b >= 0.0, "critical.betas must be nonnegative");
  c.moment = get<bool>(flat, "checks.moment");
  c.hydrogen = get<bool>(flat, "checks.hydrogen");
  c.derivative = get<bool>(flat, "checks.derivative");
  c.dump_density = get<bool>(flat, "output.density");
  c.jobs = get_int(flat, "jobs");
  require(c.jobs >= 0, "jobs must be nonnegative (0 = all cores)");
  c.quick = get<bool>(flat, "quick");
  c.out = get<std::string>(flat, "out");
  require(!c.out.empty(), "out must name a directory");

  switch (command) {
    case Command::Hs:
      require(c.params.zeta > 0.0, "hs needs zeta > 0");
      break;
    case Command::Confined:
      require(c.params.beta > 0.0, "confined needs beta > 0");
      break;
    case Command::ScanBeta:
      for (double b : c.scan_values) require(b >= 0.0, "scan.values must be nonnegative field strengths");
      if (c.scan_mode == "small")
        for (double b : c.scan_values) require(b > 0.0 && b <= 0.2, "small-field scan needs values in (0, 0.2]");
      if (c.scan_mode == "large")
        for (double b : c.scan_values) require(b > 0.0, "strong-field scan needs positive values");
      break;
    case Command::ScanLambda:
      for (double l : c.scan_values) require(l > 0.0, "scan.values must be positive charges");
      break;
    case Command::ScalingAudit:
      break;
    default:
      break;
  }
  return c;
}

}  // namespace bosatom::cli
