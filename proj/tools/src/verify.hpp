#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bosatom/regimes.hpp"

namespace bosatom::cli {

struct CriterionResult {
  int id = 0;
  std::string title;
  ScanResult result;
  double seconds = 0.0;
  std::string error;          ///< set when the criterion could not be evaluated
  bool solver_failure = false;  ///< the error was a non-converged solve

  bool passed() const { return error.empty() && result.passed(); }
};

struct VerifyOptions {
  bool quick = false;
  int jobs = 1;
  SolverOptions solver;  ///< tolerances shared by every 2-D solve
};

/// Runs the thirteen acceptance criteria. Criteria run concurrently on up to
/// `jobs` workers; the returned list is ordered by criterion number.
std::vector<CriterionResult> run_verify(const VerifyOptions& opts, std::ostream* progress = nullptr);

/// criterion, title, check, pass, value, bound, informational, statement
void write_verify_csv(std::ostream& os, const std::vector<CriterionResult>& results);

}  // namespace bosatom::cli
