#pragma once

#include <iosfwd>
#include <vector>

#include "bosatom/energy.hpp"
#include "bosatom/hs1d.hpp"

namespace bosatom {

/// Positive root of sqrt(beta) = L sinh(L / 2).
double l_of_beta(double beta);

/// Longitudinal kernels of the lowest-Landau-band ansatz in the scaled
/// coordinate u = L z (transverse coordinate t = sqrt(beta) r):
///   V_A(u) = int_0^inf r e^{-r^2/2} dr / (L sqrt(L^2 r^2 / beta + u^2)),
///   V_R(u) = int_0^inf (s/2) e^{-s^2/4} ds / (L sqrt(L^2 s^2 / beta + u^2)).
/// The antiderivatives G0 = int_0^u V_A, G1 = int_0^u t V_A (and F0, F1 for V_R)
/// are tabulated on a graded u-grid and interpolated by cubic Hermite splines
/// with the exact derivatives.
class EffectiveKernels {
public:
  EffectiveKernels(double beta, double u_max, double ratio = 1.02);

  double beta() const { return beta_; }
  double L() const { return L_; }
  double u_max() const { return u_.back(); }
  const std::vector<double>& u_nodes() const { return u_; }

  double va(double u) const;
  double vr(double u) const;
  double g0(double u) const;  ///< odd in u
  double g1(double u) const;  ///< even in u
  double f0(double u) const;
  double f1(double u) const;

  /// int_{x0}^{x1} w(t) V(t) dt for the linear weight rising from 0 at x0 to 1 at x1
  /// (`rising`) or falling from 1 to 0.
  double hat_integral_a(double x0, double x1, bool rising) const;
  double hat_integral_r(double x0, double x1, bool rising) const;

  /// Direct adaptive quadrature of the defining radial integrals (no table).
  static double va_quadrature(double beta, double L, double u);
  static double vr_quadrature(double beta, double L, double u);

private:
  struct Table {
    std::vector<double> v, f0, f1;
  };
  double interp_v(const Table& t, const std::vector<double>& dv, double x) const;
  double interp_f0(const Table& t, double x) const;
  double interp_f1(const Table& t, double x) const;
  double hat(const Table& t, const std::vector<double>& dv, double x0, double x1, bool rising) const;

  double beta_, L_;
  std::vector<double> u_;
  Table a_, r_;
  std::vector<double> dva_, dvr_;
};

EffectiveKernels build_kernels(double beta, double u_max);

struct ConfinedParams {
  double lambda = 1.0;
  double beta = 100.0;
  double zeta = 1.0;
  double alpha = 1.0;
  void validate() const;
};

struct ConfinedGridOptions {
  double h0 = 1e-3;
  double ratio = 1.03;
  double z_max = 400.0;  ///< in the scaled coordinate u
};

struct ConfinedOptions {
  double tol = 1e-9;
  int max_iter = 20000;
  double overcritical_mu_factor = 1e-4;
  double critical_tol = 1e-6;  ///< bracket width of the critical-charge search
};

struct ConfinedResult {
  HSDensity density;        ///< longitudinal profile psi^2 in the scaled coordinate u
  EnergyBreakdown energy;   ///< unscaled functional; K = L^2 K_psi
  double K_psi = 0.0;       ///< scaled kinetic energy int psi'^2 du
  double L = 0.0;
  double scaled_energy = 0.0;  ///< E / L^2
  double residual = 0.0;
  int iterations = 0;
  double bound_charge = 0.0;
  bool clamped = false;
};

/// Minimizes the energy over the product states chi(r) f(z) with chi the lowest
/// Landau orbital. Charges above the band's critical charge are clamped.
ConfinedResult confined_minimize(const ConfinedParams& params, const EffectiveKernels& kernels,
                                 const ConfinedGridOptions& grid = {},
                                 const ConfinedOptions& opts = {});
ConfinedResult confined_minimize(const ConfinedParams& params,
                                 const ConfinedGridOptions& grid = {},
                                 const ConfinedOptions& opts = {});

/// int V_A rho du for a profile given in the scaled coordinate, i.e. the band
/// attraction divided by L^2; tends to rho(0) as beta grows.
double confined_attraction(const HSDensity& profile, const EffectiveKernels& kernels);

struct ConfinedRow {
  double beta = 0.0;
  double L = 0.0;
  double energy = 0.0;
  double scaled = 0.0;
  double hs = 0.0;
};
/// beta, L, E_conf, E_conf_over_L2, E_HS
void write_confined_csv(std::ostream& os, const std::vector<ConfinedRow>& rows);

}  // namespace bosatom
