#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bosatom/hs1d.hpp"
#include "bosatom/llband.hpp"
#include "bosatom/mh_solver.hpp"

namespace bosatom {

/// One named pass/fail record. `statement` is the mathematical property being
/// tested, in words; `value` is compared against `bound`.
struct Check {
  std::string name;
  std::string statement;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
  bool informational = false;  ///< reported, never counted as a failure
};

struct ScanPoint {
  double parameter = 0.0;
  EnergyBreakdown energy;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool clamped = false;
  std::vector<std::pair<std::string, double>> extra;  ///< scan-specific columns

  double get(const std::string& key) const;
};

struct ScanResult {
  std::string axis;
  std::vector<ScanPoint> points;  ///< sorted by parameter
  std::vector<Check> checks;

  Check& add(std::string name, std::string statement, bool pass, double value, double bound);
  void note(std::string name, std::string statement, double value);
  bool passed() const;
  void append(const ScanResult& other);  ///< takes the other result's checks
};

/// Columns: parameter name, E, K, A, R, mu, residual, iterations, converged,
/// clamped, then the union of the points' extra keys.
void write_scan_csv(std::ostream& os, const ScanResult& scan);

/// Runs fn(0..n-1) on at most `jobs` threads (0: hardware concurrency). Each
/// job writes only its own slot, so the output is independent of scheduling.
/// The first exception (lowest index) is rethrown after all jobs finish.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

/// Grid factory used by scans that need several 2-D contexts.
using ContextFactory = std::function<MHContext(const MHParams&)>;

// ---------------------------------------------------------------- critical

struct CriticalEstimate {
  double beta = 0.0;
  CriticalCharge search;
  double lambda_c = 0.0;
  double plateau_energy = 0.0;  ///< E at the last bound charge
  double plateau_onset = 0.0;   ///< E(upper) - E(lower): flat beyond lambda_c
};

/// Zero crossing of mu(lambda) at fixed beta to the bracket width in `opts`.
CriticalEstimate critical_charge(double beta, const MHContext& ctx, const SolverOptions& opts = {});

/// lambda_c on a beta ladder, with the lower bound lambda_c > 1 checked at every
/// point and, optionally, a target value at beta = 0.
ScanResult critical_scan(const std::vector<double>& betas, const ContextFactory& contexts,
                         const SolverOptions& opts, int jobs = 1,
                         std::optional<std::pair<double, double>> beta0_target = std::nullopt);

// ---------------------------------------------------------------- weak field

struct SmallBetaOptions {
  double slope_tol = 0.02;
  double sandwich_slack = 1e-9;  ///< relative to |E|
};

/// E(lambda, beta) - E(lambda, 0) against -lambda beta on a ladder in (0, 0.2].
/// The slope is the beta -> 0 intercept of a least-squares polynomial of degree
/// min(2, n - 1) through q(beta) = (E(beta) - E(0)) / beta. Every point is checked against
///   E(0) - beta lambda <= E(beta) <= E(0) - beta lambda + (beta^2/4) int r^2 rho_0.
ScanResult small_beta_check(double lambda, const std::vector<double>& betas, const MHContext& ctx,
                            const SolverOptions& opts = {}, int jobs = 1,
                            const SmallBetaOptions& sb = {});

// ---------------------------------------------------------------- strong field

struct LargeBetaOptions {
  ConfinedGridOptions grid;
  ConfinedOptions solver;
};

/// Confined energies E_conf / L(beta)^2 against the hyper-strong energy on an
/// increasing ladder. Checks: strictly shrinking gap, a bounded L-scaled gap
/// (its increments must not grow), and reports the fitted constant C of
///   E_conf / L^2 <= (1 - C lambda / L) E_HS + C lambda / L.
ScanResult large_beta_check(double lambda, const std::vector<double>& betas, int jobs = 1,
                            const LargeBetaOptions& lb = {});

/// E_conf(lambda, beta) >= E(lambda, beta) from the 2-D solver.
ScanResult subset_ordering(double lambda, double beta, const MHContext& ctx,
                           const SolverOptions& opts = {}, const LargeBetaOptions& lb = {});

// ---------------------------------------------------------------- scaling

struct ScalingSample {
  MHParams params;
  double tolerance = 1e-3;
};

/// E_ext(lambda, beta, zeta, alpha) against (zeta^3/alpha) E(alpha lambda/zeta, beta/zeta^2)
/// for each sample; the second route runs on the grid stretched by zeta. The
/// same relation evaluated on the unstretched grid is reported for reference.
ScanResult scaling_audit(const std::vector<ScalingSample>& samples, const MHContext& ctx,
                         const SolverOptions& opts = {}, int jobs = 1);

// ---------------------------------------------------------------- identities

struct IdentityOptions {
  double relation_tol = 1e-2;  ///< R = -E + lambda mu, relative to |E|
  double virial_tol = 1e-2;
  double moment_tol = 2e-2;
  double ratio_tol = 2e-2;
  double bookkeeping_tol = 1e-12;
  bool moment = false;    ///< also run the magnetic-moment identity (three extra solves)
  bool hydrogen = false;  ///< also run the hydrogen sandwich (two extra solves)
  bool derivative = false;  ///< also compare mu with dE/dlambda (two extra solves)
  bool at_critical = false;  ///< solution sits at lambda_c: check 1:1:3:1 ratios
};

/// Every identity and bound applicable to a converged solution.
ScanResult identity_suite(const Solution& sol, const MHContext& ctx, const SolverOptions& opts = {},
                          const IdentityOptions& id = {});

/// Two minimizations from independent random starts must agree:
/// ||rho_1 - rho_2||_1 <= tol * lambda.
ScanResult uniqueness_probe(const MHParams& params, const MHContext& ctx, const SolverOptions& opts,
                            std::uint64_t seed_a, std::uint64_t seed_b, double tol = 1e-5);

// ---------------------------------------------------------------- ladders

/// 2-D solves along a lambda ladder at fixed beta; checks E decreasing and
/// convex in lambda and E / lambda increasing.
ScanResult lambda_scan(const MHParams& base, const std::vector<double>& lambdas, const MHContext& ctx,
                       const SolverOptions& opts = {}, int jobs = 1, double convexity_tol = 1e-6);

/// 2-D solves along a beta ladder at fixed lambda; checks the diamagnetic lower
/// bound -(1/4 + beta) lambda <= E at every point.
ScanResult beta_scan(const MHParams& base, const std::vector<double>& betas, const ContextFactory& contexts,
                     const SolverOptions& opts = {}, int jobs = 1);

/// Hyper-strong checks: closed form at lambda = 2, strict decrease below 2,
/// plateau above 2, virial ratios at the critical charge, hydrogen limit.
ScanResult hs_suite(const HSGridOptions& grid = {}, const HSSolverOptions& opts = {});

}  // namespace bosatom
