#pragma once

// Even 1-D density functionals on a half-line grid, shared by the hyper-strong
// and confined theories:
//   E(psi) = psi^T T psi - a . rho + (1/2) rho^T S rho,   rho = psi^2,
// under sum W rho = mass. Node 0 sits at the origin, the last node is pinned to
// zero. All quantities are full-line (both halves) totals.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "bosatom/energy.hpp"

namespace bosatom::detail {

struct LineProblem {
  std::vector<double> nodes;  ///< 0 = u_0 < ... < u_n; u_n is Dirichlet
  Eigen::VectorXd weight;     ///< lumped full-line weights, size n
  Eigen::VectorXd t_diag;     ///< kinetic form, tridiagonal
  Eigen::VectorXd t_off;
  Eigen::VectorXd attraction;
  Eigen::VectorXd contact;    ///< S = diag(contact) when `repulsion` is empty
  Eigen::MatrixXd repulsion;  ///< dense symmetric S

  int size() const { return static_cast<int>(weight.size()); }
  bool local() const { return repulsion.size() == 0; }

  /// Adds edge terms scale * (psi_k - psi_{k+1})^2 / h_k, doubled for the mirror half.
  void set_kinetic(double scale);
  /// Lumped weights: h_0 at the origin, h_{k-1} + h_k elsewhere.
  void set_lumped_weights();
  Eigen::VectorXd field(const Eigen::VectorXd& rho) const;  ///< S rho
};

struct LineState {
  Eigen::VectorXd psi;
  EnergyBreakdown energy;
  double residual = 0.0;
  double noise = 0.0;  ///< rounding level of the residual
  int iterations = 0;
  bool converged = false;
};

struct LineOptions {
  double tol = 1e-10;
  int max_iter = 20000;
  double newton_switch = 1e-3;
  double tau = 50.0;
  bool throw_on_failure = true;  ///< otherwise return the last state unconverged
};

LineState line_evaluate(const LineProblem& p, const Eigen::VectorXd& psi);

/// Semi-implicit flow followed by constrained Newton polishing.
/// Throws ConvergenceError when the residual does not reach `tol`, unless
/// `throw_on_failure` is off.
LineState line_minimize(const LineProblem& p, double mass, const LineOptions& opts,
                        const std::optional<Eigen::VectorXd>& start = std::nullopt);

/// Half-line nodes 0, h0, ... with spacings h0 * ratio^k capped at h_max,
/// ending exactly at z_max.
std::vector<double> graded_half_nodes(double h0, double ratio, double h_max, double z_max);

}  // namespace bosatom::detail
