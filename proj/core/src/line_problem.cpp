#include "line_problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bosatom/grid.hpp"

namespace bosatom::detail {

using Eigen::VectorXd;

void LineProblem::set_kinetic(double scale) {
  const int n = static_cast<int>(nodes.size()) - 1;
  t_diag = VectorXd::Zero(n);
  t_off = VectorXd::Zero(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) {
    const double c = 2.0 * scale / (nodes[k + 1] - nodes[k]);
    t_diag[k] += c;
    if (k + 1 < n) {
      t_diag[k + 1] += c;
      t_off[k] = -c;
    }
  }
}

void LineProblem::set_lumped_weights() {
  const int n = static_cast<int>(nodes.size()) - 1;
  weight.resize(n);
  weight[0] = nodes[1] - nodes[0];
  for (int k = 1; k < n; ++k) weight[k] = nodes[k + 1] - nodes[k - 1];
}

VectorXd LineProblem::field(const VectorXd& rho) const {
  if (local()) return contact.cwiseProduct(rho);
  return repulsion * rho;
}

namespace {

VectorXd apply_t(const LineProblem& p, const VectorXd& x) {
  VectorXd y = p.t_diag.cwiseProduct(x);
  for (int k = 0; k + 1 < p.size(); ++k) {
    y[k] += p.t_off[k] * x[k + 1];
    y[k + 1] += p.t_off[k] * x[k];
  }
  return y;
}

/// LDL^T of a symmetric tridiagonal matrix; false if a pivot is not positive.
bool tridiag_factor(const VectorXd& diag, const VectorXd& off, VectorXd& d) {
  const int n = static_cast<int>(diag.size());
  d.resize(n);
  for (int k = 0; k < n; ++k) {
    d[k] = diag[k] - (k > 0 ? off[k - 1] * off[k - 1] / d[k - 1] : 0.0);
    if (!(d[k] > 0.0)) return false;
  }
  return true;
}

VectorXd tridiag_solve(const VectorXd& off, const VectorXd& d, VectorXd b) {
  const int n = static_cast<int>(b.size());
  for (int k = 1; k < n; ++k) b[k] -= off[k - 1] / d[k - 1] * b[k - 1];
  b[n - 1] /= d[n - 1];
  for (int k = n - 2; k >= 0; --k) b[k] = b[k] / d[k] - off[k] / d[k] * b[k + 1];
  return b;
}

/// Lowest-eigenvalue shift: s with T - diag(a) + diag(phi) + s W just positive definite.
double lowest_shift(const LineProblem& p, const VectorXd& phi, const VectorXd& psi) {
  VectorXd d;
  const VectorXd base = p.t_diag - p.attraction + phi;
  auto definite = [&](double sigma) { return tridiag_factor(base - sigma * p.weight, p.t_off, d); };
  const double m = p.weight.dot(psi.cwiseAbs2());
  double hi = (psi.dot(apply_t(p, psi)) + (phi - p.attraction).dot(psi.cwiseAbs2())) / m;
  double lo = std::min(hi, 0.0) - 1.0;
  while (!definite(lo)) lo = 2.0 * lo - 1.0;
  for (int it = 0; it < 60 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (definite(mid) ? lo : hi) = mid;
  }
  return -lo;
}

/// Implicit step with the mean field frozen at the current density:
/// (W + tau (H[rho] + s W)) psi' = (1 + tau (s + mu)) W psi.
VectorXd frozen_step(const LineProblem& p, const LineState& st, double tau) {
  const VectorXd phi = p.field(st.psi.cwiseAbs2());
  const double s = lowest_shift(p, phi, st.psi);
  VectorXd pivots;
  const VectorXd diag = tau * (p.t_diag - p.attraction + phi + s * p.weight) + p.weight;
  if (!tridiag_factor(diag, tau * p.t_off, pivots))
    throw InstabilityError("line flow operator is not definite", st.residual, st.iterations);
  return tridiag_solve(tau * p.t_off, pivots,
                       (1.0 + tau * (s + st.energy.mu)) * p.weight.cwiseProduct(st.psi));
}

void normalize(VectorXd& psi, const LineProblem& p, double mass) {
  const double m = p.weight.dot(psi.cwiseAbs2());
  if (!(m > 0.0) || !std::isfinite(m)) throw InstabilityError("degenerate line state", 0.0, 0);
  psi *= std::sqrt(mass / m);
}

/// One safeguarded Newton step on the stationarity system with the mass
/// constraint; returns false if no step length reduces the residual.
bool newton_step(const LineProblem& p, double mass, LineState& st) {
  const int n = p.size();
  const VectorXd& psi = st.psi;
  const VectorXd rho = psi.cwiseAbs2();
  const VectorXd phi = p.field(rho);
  const double mu = st.energy.mu;
  const VectorXd g = apply_t(p, psi) + (phi - p.attraction - mu * p.weight).cwiseProduct(psi);

  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int k = 0; k < n; ++k) {
    j(k, k) = p.t_diag[k] + phi[k] - p.attraction[k] - mu * p.weight[k];
    if (k + 1 < n) j(k, k + 1) = j(k + 1, k) = p.t_off[k];
  }
  if (p.local()) {
    for (int k = 0; k < n; ++k) j(k, k) += 2.0 * p.contact[k] * rho[k];
  } else {
    j.topLeftCorner(n, n) += 2.0 * psi.asDiagonal() * p.repulsion * psi.asDiagonal();
  }
  const VectorXd wpsi = p.weight.cwiseProduct(psi);
  j.block(0, n, n, 1) = -wpsi;
  j.block(n, 0, 1, n) = -wpsi.transpose();
  VectorXd rhs(n + 1);
  rhs.head(n) = -g;
  rhs[n] = 0.5 * (p.weight.dot(rho) - mass);
  const VectorXd step = j.partialPivLu().solve(rhs);
  if (!step.allFinite()) return false;

  double t = 1.0;
  for (int tries = 0; tries < 8; ++tries, t *= 0.5) {
    VectorXd trial = (psi + t * step.head(n)).cwiseAbs();
    normalize(trial, p, mass);
    LineState next = line_evaluate(p, trial);
    if (next.residual < st.residual) {
      next.iterations = st.iterations;
      st = std::move(next);
      return true;
    }
  }
  return false;
}

}  // namespace

LineState line_evaluate(const LineProblem& p, const VectorXd& psi) {
  LineState s;
  s.psi = psi;
  const VectorXd rho = psi.cwiseAbs2();
  const VectorXd tpsi = apply_t(p, psi);
  const VectorXd phi = p.field(rho);
  EnergyBreakdown& e = s.energy;
  // Edge form: psi^T T psi without the cancellation of large stencil entries.
  e.K = 0.0;
  for (int k = 0; k + 1 < p.size(); ++k) {
    const double d = psi[k] - psi[k + 1];
    e.K -= p.t_off[k] * d * d;
  }
  // Edges to the pinned node carry the remaining diagonal weight.
  {
    const int last = p.size() - 1;
    const double c = p.t_diag[last] + (last > 0 ? p.t_off[last - 1] : 0.0);
    e.K += c * psi[last] * psi[last];
  }
  e.A = p.attraction.dot(rho);
  e.R = 0.5 * rho.dot(phi);
  e.E = e.K - e.A + e.R;
  const double m = p.weight.dot(rho);
  e.mu = (e.K - e.A + 2.0 * e.R) / m;
  const VectorXd g = tpsi + (phi - p.attraction - e.mu * p.weight).cwiseProduct(psi);
  s.residual = std::sqrt(g.cwiseAbs2().cwiseQuotient(p.weight).sum() / m);
  // Rounding level of g, from the magnitudes entering the stencil sums.
  VectorXd mag = p.t_diag.cwiseProduct(psi.cwiseAbs());
  for (int k = 0; k + 1 < p.size(); ++k) {
    mag[k] += std::abs(p.t_off[k] * psi[k + 1]);
    mag[k + 1] += std::abs(p.t_off[k] * psi[k]);
  }
  s.noise = 1e-15 * std::sqrt(mag.cwiseAbs2().cwiseQuotient(p.weight).sum() / m);
  return s;
}

LineState line_minimize(const LineProblem& p, double mass, const LineOptions& opts,
                        const std::optional<VectorXd>& start) {
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  const int n = p.size();
  VectorXd psi(n);
  if (start) {
    if (start->size() != n) throw InvalidArgument("start vector size mismatch");
    psi = start->cwiseAbs();
  } else {
    for (int k = 0; k < n; ++k) psi[k] = std::exp(-0.5 * p.nodes[k]);
  }
  normalize(psi, p, mass);

  LineState st = line_evaluate(p, psi);
  auto converged = [&](const LineState& x) { return x.residual <= std::max(opts.tol, 100.0 * x.noise); };
  double tau = opts.tau;
  int increases = 0, newton_wait = 0, stalls = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    st.iterations = it;
    if (converged(st)) break;
    if (st.residual <= opts.newton_switch && --newton_wait <= 0) {
      for (int k = 0; k < 30 && !converged(st); ++k)
        if (!newton_step(p, mass, st)) break;
      if (converged(st)) break;
      // Newton stalled: take some flow steps before trying again.
      if (++stalls > 5) break;
      newton_wait = 50;
    }
    VectorXd next = frozen_step(p, st, tau);
    normalize(next, p, mass);
    LineState trial = line_evaluate(p, next);
    trial.iterations = it;
    if (trial.energy.E > st.energy.E + 1e-13 * std::abs(st.energy.E)) {
      if (++increases >= 40) throw InstabilityError("line flow energy keeps increasing", st.residual, it);
      tau *= 0.5;
      continue;
    }
    increases = 0;
    st = std::move(trial);
    tau = std::min(2.0 * tau, opts.tau);
  }
  st.converged = converged(st);
  if (st.converged || !opts.throw_on_failure) return st;
  std::ostringstream msg;
  msg << "line solver did not converge (residual " << st.residual << ")";
  throw ConvergenceError(msg.str(), st.residual, opts.max_iter);
}

std::vector<double> graded_half_nodes(double h0, double ratio, double h_max, double z_max) {
  if (!(h0 > 0.0) || !(ratio >= 1.0) || !(h_max >= h0) || !(z_max > 4.0 * h0))
    throw InvalidArgument("invalid graded grid parameters");
  std::vector<double> z{0.0};
  double h = h0;
  while (z.back() + h < z_max) {
    z.push_back(z.back() + h);
    h = std::min(h * ratio, h_max);
  }
  if (z_max - z.back() < 0.5 * (z.back() - z[z.size() - 2])) z.pop_back();
  z.push_back(z_max);
  return z;
}

}  // namespace bosatom::detail
