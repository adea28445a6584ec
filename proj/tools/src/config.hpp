#pragma once

#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bosatom/hs1d.hpp"
#include "bosatom/llband.hpp"
#include "bosatom/mh_solver.hpp"

namespace bosatom::cli {

/// Bad input before any computation starts (exit code 3).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Command { Solve, Hs, Confined, ScanBeta, ScanLambda, Critical, ScalingAudit, Verify };

std::string to_string(Command c);
Command parse_command(const std::string& s);

struct GridSpec {
  double r_max = 30.0;
  double z_max = 30.0;
  int n_r = 129;
  int n_z = 257;
};

struct RunConfig {
  Command command = Command::Solve;
  MHParams params;
  GridSpec grid;
  SolverOptions solver;
  HSGridOptions hs_grid;
  ConfinedGridOptions confined_grid;
  std::vector<double> scan_values;  ///< empty: command default
  std::string scan_mode = "auto";   ///< scan-beta: auto, small, large, grid
  std::vector<double> critical_betas;
  bool moment = false;
  bool hydrogen = false;
  bool derivative = false;
  bool dump_density = true;
  int jobs = 1;
  bool quick = false;
  std::string out = "bosatom-out";
};

/// Every accepted key with its default, as flat dotted JSON.
nlohmann::json default_config_json();

/// Merges `overrides` (flat dotted keys) into `base`; unknown keys and type
/// mismatches raise ConfigError.
void merge_config(nlohmann::json& base, const nlohmann::json& overrides, const std::string& origin);

/// Typed view of a merged flat config, validated (grids are built to check them).
RunConfig resolve(Command command, const nlohmann::json& flat);

/// Parses "key=value"; the value is read as JSON when possible, else as a string.
std::pair<std::string, nlohmann::json> parse_assignment(const std::string& s);

nlohmann::json load_config_file(const std::string& path);

}  // namespace bosatom::cli
