#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>

#include "config.hpp"

namespace bosatom::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kNotConverged = 2, kConfigError = 3 };

/// {"error": {"kind", "exit_code", "message", ...}}
nlohmann::json error_record(const std::string& kind, int exit_code, const std::string& message);

struct Outcome {
  int exit_code = kOk;
  nlohmann::json summary;  ///< also written to <out>/summary.json
};

/// Runs one command. `resolved` is the merged flat config echoed into the
/// summary. Artifacts go to cfg.out; progress lines to `log`.
Outcome run(const RunConfig& cfg, const nlohmann::json& resolved, std::ostream& log);

}  // namespace bosatom::cli
