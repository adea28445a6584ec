#pragma once

#include <iosfwd>
#include <vector>

#include "bosatom/energy.hpp"

namespace bosatom {

/// Even 1-D density of the hyper-strong functional
///   E[rho] = int (d/dz sqrt(rho))^2 - zeta rho(0) + (alpha/2) int rho^2
/// on a symmetric node set containing z = 0.
struct HSDensity {
  std::vector<double> z_nodes;
  std::vector<double> values;

  /// Throws InvalidArgument for unsorted or asymmetric nodes, a missing origin,
  /// size mismatch, or negative values.
  void validate() const;
  double mass() const;  ///< trapezoid rule
};

struct HSParams {
  double lambda = 1.0;
  double zeta = 1.0;
  double alpha = 1.0;

  void validate() const;
  /// Largest charge that can be bound: 2 zeta / alpha (infinite for alpha = 0).
  double critical_charge() const;
};

struct HSGridOptions {
  double h0 = 1e-3;
  double ratio = 1.02;
  double h_max = 1e300;
  double z_max = 1e4;
};

struct HSSolverOptions {
  double tol = 1e-10;
  int max_iter = 20000;
};

/// Offset c with tanh c = (2 - lambda)/2, for 0 < lambda < 2.
double hs_offset(double lambda);

/// Closed-form minimizer; lambda >= 2 gives 2 / (2 + |z|)^2.
double hs_exact_density(double lambda, double z);

HSDensity hs_exact_profile(double lambda, const std::vector<double>& z_nodes);

/// Energy of the closed-form minimizer by adaptive quadrature. For lambda > 2
/// the lambda = 2 minimizer is returned (the extra charge is not bound).
/// mu is the chemical potential from lambda mu = E + R.
EnergyBreakdown hs_energy_exact(double lambda);

/// Discrete functional on the node set (P1 kinetic term, trapezoid weights).
EnergyBreakdown hs_evaluate(const HSDensity& rho, double zeta = 1.0, double alpha = 1.0);

struct HSResult {
  HSDensity density;
  EnergyBreakdown energy;
  double residual = 0.0;
  int iterations = 0;
  double bound_charge = 0.0;  ///< min(lambda, critical charge)
  bool clamped = false;
};

/// Gradient flow plus Newton polishing on a graded grid. Throws ConvergenceError.
HSResult hs_minimize(const HSParams& params, const HSGridOptions& grid = {},
                     const HSSolverOptions& opts = {});

struct HSResidual {
  double residual = 0.0;     ///< interior part combined with the jump defect
  double interior = 0.0;     ///< || (p^2 + rho - mu) psi || / || psi || away from 0
  double jump_defect = 0.0;  ///< (psi'(0+) - psi'(0-) + psi(0)) / psi(0)
  double mu = 0.0;           ///< Rayleigh quotient of the interior operator
  double mu_identity = 0.0;  ///< (E + R) / lambda
};

/// Residual of (p_z^2 - delta(z) + rho) psi = mu psi with the delta treated as
/// the derivative jump psi'(0+) - psi'(0-) = -psi(0).
HSResidual hs_linear_residual(const HSDensity& rho, double lambda);

/// z, rho_exact, rho_numeric
void write_hs_profile_csv(std::ostream& os, const HSDensity& exact, const HSDensity& numeric);

struct HSEnergyRow {
  double lambda = 0.0;
  double exact = 0.0;
  EnergyBreakdown numeric;
};
/// lambda, E_exact, E_numeric, K, A, R, mu
void write_hs_energy_csv(std::ostream& os, const std::vector<HSEnergyRow>& rows);

}  // namespace bosatom
