#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bosatom/coulomb.hpp"
#include "bosatom/energy.hpp"
#include "bosatom/grid.hpp"

namespace bosatom {

/// Parameters of the extended magnetic Hartree functional
///   lambda Tr[(H_beta - beta) G] - lambda zeta int rho/|x| + alpha lambda^2 D[rho, rho].
/// zeta = alpha = 1 is the plain functional.
struct MHParams {
  double lambda = 1.0;  ///< total charge N/Z
  double beta = 0.0;    ///< scaled field B/Z^2
  double zeta = 1.0;    ///< nuclear-charge multiplier
  double alpha = 1.0;   ///< repulsion multiplier

  void validate() const;
  bool is_plain() const { return zeta == 1.0 && alpha == 1.0; }
};

enum class InitialGuess { HydrogenLandau, Random };

struct SolverOptions {
  double tol = 1e-6;          ///< residual of the Hartree equation
  double energy_tol = 1e-10;  ///< relative energy change per step
  int max_iter = 20000;
  double tau = 50.0;  ///< initial pseudo-time step
  int max_energy_increases = 10;
  InitialGuess init = InitialGuess::HydrogenLandau;
  std::uint64_t seed = 1;
  std::optional<std::vector<double>> start;  ///< plain-mode density on the grid
  bool clamp_overcritical = true;
  double overcritical_mu_factor = 1e-4;  ///< mu > factor * |E| / lambda is overcritical
  double critical_width = 0.01;
  double critical_ceiling = 0.0;  ///< 0 selects 2 + (1 + beta)/2 in plain units
};

struct Solution {
  Density2D density;  ///< plain mode: integrates to the bound charge
  EnergyBreakdown breakdown;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  MHParams params;
  std::optional<double> theta;
  bool overcritical = false;
  std::optional<double> critical_charge;  ///< set when the mass was clamped
  double mass = 0.0;
  double boundary_fraction = 0.0;
};

/// Grid plus prepared Coulomb kernel; immutable and shareable across threads.
class MHContext {
public:
  MHContext(GridPtr grid, KernelPtr kernel);
  explicit MHContext(GridPtr grid);

  const Grid2D& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const AziKernel& kernel() const { return *kernel_; }
  const KernelPtr& kernel_ptr() const { return kernel_; }
  const std::vector<double>& nuclear() const { return nuclear_; }

private:
  GridPtr grid_;
  KernelPtr kernel_;
  std::vector<double> nuclear_;
};

/// Energy breakdown of a plain-mode density (mass <= lambda) under `params`.
/// Throws InvalidArgument for negative entries.
EnergyBreakdown evaluate(const Density2D& rho, const MHParams& params, const MHContext& ctx);

/// Same functional for an extended-mode density of mass <= 1.
EnergyBreakdown evaluate_extended(const Density2D& unit_rho, const MHParams& params,
                                  const MHContext& ctx);

Density2D to_plain(const Density2D& unit_rho, double lambda);
Density2D to_extended(const Density2D& rho, double lambda);

/// || (H_mf - mu) sqrt(rho) || / || sqrt(rho) || with mu the Rayleigh quotient.
double residual(const Density2D& rho, const MHParams& params, const MHContext& ctx);

/// Minimizes the functional under int rho = lambda by semi-implicit gradient flow.
/// Overcritical charges are clamped to the detected critical charge.
Solution minimize(const MHParams& params, const MHContext& ctx, const SolverOptions& opts = {});

/// Rayleigh-quotient chemical potential; throws for unconverged input.
double chemical_potential(const Solution& sol);

struct MomentResult {
  double theta = 0.0;
  double step = 0.0;
  Solution center;
  double identity_defect = 0.0;  ///< beta theta - (K - |E|)/2
};

/// theta = dE/dbeta by central differences (forward at beta < step).
MomentResult magnetic_moment(const MHParams& params, const MHContext& ctx,
                             const SolverOptions& opts = {}, double step = 0.0);

struct ExtendedEnergy {
  double direct = 0.0;       ///< minimization of the extended functional
  double via_scaling = 0.0;  ///< (zeta^3/alpha) E(alpha lambda/zeta, beta/zeta^2)
  double relative_mismatch = 0.0;
  Solution direct_solution;
  Solution scaled_solution;
};

/// Extended energy by direct minimization, cross-checked against the scaling
/// relation evaluated by the plain solver on the grid stretched by zeta (the
/// equivalent discretization).
ExtendedEnergy extended_energy(const MHParams& params, const MHContext& ctx,
                               const SolverOptions& opts = {});

struct CriticalCharge {
  double lambda_c = 0.0;
  double lower = 0.0;  ///< largest probed charge with mu < 0
  double upper = 0.0;  ///< smallest probed charge with mu > 0
  double mu_lower = 0.0;
  double mu_upper = 0.0;
  double energy_lower = 0.0;
  double energy_upper = 0.0;
  int solves = 0;
};

/// Locates the zero crossing of mu(lambda) at fixed beta, zeta, alpha to the
/// requested bracket width. Throws SolverError if mu stays negative up to the ceiling.
CriticalCharge find_critical_charge(const MHParams& params, const MHContext& ctx,
                                    const SolverOptions& opts = {});

}  // namespace bosatom
