#include "bosatom/mh_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace bosatom {

void MHParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be nonnegative");
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw InvalidArgument("zeta must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be nonnegative");
}

MHContext::MHContext(GridPtr grid, KernelPtr kernel)
    : grid_(std::move(grid)), kernel_(std::move(kernel)), nuclear_(nuclear_potential(*grid_)) {
  if (!(*grid_ == kernel_->grid())) throw InvalidArgument("kernel was built for a different grid");
}

MHContext::MHContext(GridPtr grid) : MHContext(grid, load_or_build_kernel(grid)) {}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

double external_potential(const Grid2D& g, const std::vector<double>& nuc, const MHParams& p,
                          int i, int j) {
  const double r = g.r(i);
  return 0.25 * p.beta * p.beta * r * r - p.beta - p.zeta * nuc[g.index(i, j)];
}

/// Discretized functional restricted to the interior (non-Dirichlet) nodes.
class Discretization {
public:
  Discretization(const MHContext& ctx, const MHParams& p) : ctx_(ctx), params_(p) {
    const Grid2D& g = ctx.grid();
    unknown_of_node_.assign(g.size(), -1);
    for (int i = 0; i < g.n_r(); ++i)
      for (int j = 0; j < g.n_z(); ++j)
        if (!g.is_boundary(i, j)) {
          unknown_of_node_[g.index(i, j)] = static_cast<int>(node_of_unknown_.size());
          node_of_unknown_.push_back(static_cast<int>(g.index(i, j)));
        }
    const int n = size();
    weight_.resize(n);
    vext_.resize(n);
    for (int i = 0; i < g.n_r(); ++i)
      for (int j = 0; j < g.n_z(); ++j) {
        const int u = unknown_of_node_[g.index(i, j)];
        if (u < 0) continue;
        weight_[u] = g.weight(i, j);
        vext_[u] = external_potential(g, ctx.nuclear(), p, i, j);
      }

    std::vector<Eigen::Triplet<double>> t;
    auto edge = [&](std::size_t a, std::size_t b, double c) {
      const int ua = unknown_of_node_[a], ub = unknown_of_node_[b];
      if (ua >= 0) t.emplace_back(ua, ua, c);
      if (ub >= 0) t.emplace_back(ub, ub, c);
      if (ua >= 0 && ub >= 0) {
        t.emplace_back(ua, ub, -c);
        t.emplace_back(ub, ua, -c);
      }
    };
    for (int i = 0; i + 1 < g.n_r(); ++i) {
      const double face = 2.0 * std::numbers::pi * g.r_face(i) / g.h_r();
      for (int j = 0; j < g.n_z(); ++j) edge(g.index(i, j), g.index(i + 1, j), face * g.z_length(j));
    }
    for (int i = 0; i < g.n_r(); ++i) {
      const double c = g.ring_area(i) / g.h_z();
      for (int j = 0; j + 1 < g.n_z(); ++j) edge(g.index(i, j), g.index(i, j + 1), c);
    }
    stiffness_.resize(n, n);
    stiffness_.setFromTriplets(t.begin(), t.end());
    stiffness_.makeCompressed();
  }

  int size() const { return static_cast<int>(node_of_unknown_.size()); }
  const SpMat& stiffness() const { return stiffness_; }
  const Vec& weight() const { return weight_; }
  const Vec& vext() const { return vext_; }
  const MHParams& params() const { return params_; }
  const MHContext& ctx() const { return ctx_; }

  Vec restrict_to_unknowns(const std::vector<double>& full) const {
    Vec v(size());
    for (int u = 0; u < size(); ++u) v[u] = full[node_of_unknown_[u]];
    return v;
  }
  std::vector<double> extend(const Vec& v) const {
    std::vector<double> full(ctx_.grid().size(), 0.0);
    for (int u = 0; u < size(); ++u) full[node_of_unknown_[u]] = v[u];
    return full;
  }

  /// alpha * (rho * 1/|x|) on the unknowns, for rho = psi^2.
  Vec mean_field(const Vec& psi) const {
    const Grid2D& g = ctx_.grid();
    std::vector<double> q(g.size(), 0.0), phi(g.size());
    for (int u = 0; u < size(); ++u) q[node_of_unknown_[u]] = weight_[u] * psi[u] * psi[u];
    if (params_.alpha == 0.0) return Vec::Zero(size());
    ctx_.kernel().convolve(q, phi);
    Vec out(size());
    for (int u = 0; u < size(); ++u) out[u] = params_.alpha * phi[node_of_unknown_[u]];
    return out;
  }

  double mass(const Vec& psi) const { return (weight_.array() * psi.array().square()).sum(); }

  struct State {
    Vec psi;
    Vec field;  // alpha * Hartree potential
    EnergyBreakdown energy;
    double residual = 0.0;
  };

  State make_state(Vec psi) const {
    State s;
    s.field = mean_field(psi);
    s.psi = std::move(psi);
    analyse(s);
    return s;
  }

  void analyse(State& s) const {
    const Grid2D& g = ctx_.grid();
    const Vec lpsi = stiffness_ * s.psi;
    const Vec rho = s.psi.array().square();
    const double kin = s.psi.dot(lpsi);
    double diamag = 0.0, attr = 0.0, rep = 0.0, m = 0.0;
    for (int u = 0; u < size(); ++u) {
      const int node = node_of_unknown_[u];
      const double r = g.r(node / g.n_z());
      const double wr = weight_[u] * rho[u];
      diamag += wr * (0.25 * params_.beta * params_.beta * r * r - params_.beta);
      attr += wr * ctx_.nuclear()[node];
      rep += wr * s.field[u];
      m += wr;
    }
    EnergyBreakdown& e = s.energy;
    e.K = kin + diamag;
    e.A = params_.zeta * attr;
    e.R = 0.5 * rep;
    e.E = e.K - e.A + e.R;
    e.mu = m > 0.0 ? (e.K - e.A + 2.0 * e.R) / m : 0.0;
    const Vec res = (lpsi.array() / weight_.array() +
                     (vext_.array() + s.field.array() - e.mu) * s.psi.array())
                        .matrix();
    const double num = (weight_.array() * res.array().square()).sum();
    s.residual = m > 0.0 ? std::sqrt(num / m) : 0.0;
  }

private:
  const MHContext& ctx_;
  MHParams params_;
  std::vector<int> unknown_of_node_;
  std::vector<int> node_of_unknown_;
  SpMat stiffness_;
  Vec weight_, vext_;
};

using Factor = Eigen::SimplicialLDLT<SpMat>;

SpMat shifted_operator(const Discretization& d, double shift, double scale) {
  // scale * (L + W (V + shift)) + W
  SpMat m = d.stiffness() * scale;
  for (int u = 0; u < d.size(); ++u)
    m.coeffRef(u, u) += d.weight()[u] * (scale * (d.vext()[u] + shift) + 1.0);
  return m;
}

bool positive_definite(const Discretization& d, double sigma, Factor& f) {
  // L + W (V - sigma) > 0  <=>  sigma below the lowest discrete eigenvalue
  SpMat m = d.stiffness();
  for (int u = 0; u < d.size(); ++u) m.coeffRef(u, u) += d.weight()[u] * (d.vext()[u] - sigma);
  f.factorize(m);
  if (f.info() != Eigen::Success) return false;
  return (f.vectorD().array() > 0.0).all();
}

/// Shift s such that L + W (V + s) is positive definite and close to singular.
double linear_shift(const Discretization& d, const Vec& psi0, Factor& f) {
  const MHParams& p = d.params();
  const Vec lpsi = d.stiffness() * psi0;
  const double m = d.mass(psi0);
  const double rq =
      (psi0.dot(lpsi) + (d.weight().array() * d.vext().array() * psi0.array().square()).sum()) / m;
  double lo = -(0.25 * p.zeta * p.zeta + p.beta) * 1.1 - 0.01;
  while (!positive_definite(d, lo, f)) lo = 2.0 * lo - 0.1;
  double hi = rq;
  for (int it = 0; it < 7; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (positive_definite(d, mid, f))
      lo = mid;
    else
      hi = mid;
  }
  return -lo;
}

Vec initial_wave(const Discretization& d, const SolverOptions& opts) {
  const MHContext& ctx = d.ctx();
  const Grid2D& g = ctx.grid();
  const MHParams& p = d.params();
  Vec psi(d.size());
  if (opts.start) {
    if (opts.start->size() != g.size()) throw InvalidArgument("start density size mismatch");
    std::vector<double> amp(g.size());
    for (std::size_t k = 0; k < amp.size(); ++k) amp[k] = std::sqrt(std::max(0.0, (*opts.start)[k]));
    psi = d.restrict_to_unknowns(amp);
  } else if (opts.init == InitialGuess::Random) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> uni(0.05, 1.0);
    for (int u = 0; u < d.size(); ++u) psi[u] = uni(rng);
  } else {
    psi = d.restrict_to_unknowns(sample(g, [&](double r, double z) {
      return std::exp(-0.5 * p.zeta * std::hypot(r, z) - p.beta * r * r / 8.0);
    }));
  }
  const double m = d.mass(psi);
  if (!(m > 0.0)) throw InvalidArgument("initial guess has zero mass");
  psi *= std::sqrt(p.lambda / m);
  return psi;
}

Solution to_solution(const Discretization& d, const Discretization::State& s, int iterations,
                     bool converged) {
  Solution sol;
  sol.density = Density2D(d.ctx().grid_ptr(), d.extend(s.psi.array().square().matrix()));
  sol.breakdown = s.energy;
  sol.residual = s.residual;
  sol.iterations = iterations;
  sol.converged = converged;
  sol.params = d.params();
  sol.mass = bosatom::mass(sol.density);
  sol.boundary_fraction = boundary_mass_fraction(sol.density);
  return sol;
}

Solution run_flow(const MHParams& params, const MHContext& ctx, const SolverOptions& opts) {
  Discretization d(ctx, params);
  Factor factor;
  factor.analyzePattern(d.stiffness());
  Vec psi = initial_wave(d, opts);
  const double s_lin = linear_shift(d, psi, factor);

  auto state = d.make_state(std::move(psi));
  double tau = opts.tau;
  double shift = s_lin;
  auto refactor = [&] {
    factor.factorize(shifted_operator(d, shift, tau));
    if (factor.info() != Eigen::Success)
      throw InstabilityError("flow operator factorization failed", state.residual, 0);
  };
  refactor();

  int increases = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const double fmax = state.field.size() ? state.field.maxCoeff() : 0.0;
    // Keep 1 + tau (shift + mu - field) positive so psi stays positive.
    const double worst = shift + state.energy.mu - fmax;
    if (1.0 + tau * worst < 0.25) {
      tau = 0.75 / (-worst);
      refactor();
    }
    Vec rhs = d.weight().array() *
              ((1.0 + tau * (shift + state.energy.mu)) - tau * state.field.array()) *
              state.psi.array();
    Vec next = factor.solve(rhs);
    const double m = d.mass(next);
    if (!(m > 0.0) || !std::isfinite(m))
      throw InstabilityError("flow produced a degenerate state", state.residual, it);
    next *= std::sqrt(params.lambda / m);

    const double e_old = state.energy.E;
    state = d.make_state(std::move(next));
    const double de = state.energy.E - e_old;
    if (de > 1e-13 * std::abs(e_old)) {
      if (++increases >= opts.max_energy_increases) {
        std::ostringstream msg;
        msg << "energy increased over " << increases << " consecutive steps (tau=" << tau << ")";
        throw InstabilityError(msg.str(), state.residual, it);
      }
      tau *= 0.5;
      refactor();
    } else {
      increases = 0;
    }
    if (state.residual <= opts.tol && std::abs(de) <= opts.energy_tol * std::abs(state.energy.E))
      return to_solution(d, state, it, true);
  }
  std::ostringstream msg;
  msg << "no convergence after " << opts.max_iter << " iterations (residual " << state.residual
      << ")";
  throw ConvergenceError(msg.str(), state.residual, opts.max_iter);
}

bool is_overcritical(const Solution& s, const SolverOptions& opts) {
  return s.breakdown.mu > opts.overcritical_mu_factor * std::abs(s.breakdown.E) / s.params.lambda;
}

}  // namespace

Density2D to_plain(const Density2D& unit_rho, double lambda) {
  Density2D out = unit_rho;
  for (double& v : out.values) v *= lambda;
  return out;
}

Density2D to_extended(const Density2D& rho, double lambda) {
  Density2D out = rho;
  for (double& v : out.values) v /= lambda;
  return out;
}

EnergyBreakdown evaluate(const Density2D& rho, const MHParams& params, const MHContext& ctx) {
  params.validate();
  rho.validate();
  if (!(*rho.grid == ctx.grid())) throw InvalidArgument("density grid differs from context grid");
  EnergyBreakdown e;
  const Wave2D psi = Wave2D::from_density(rho);
  e.K = kinetic_energy(psi) + diamagnetic_term(rho, params.beta);
  e.A = params.zeta * attraction_energy(rho);
  e.R = params.alpha == 0.0 ? 0.0 : params.alpha * direct_energy(rho, ctx.kernel());
  e.E = e.K - e.A + e.R;
  const double m = mass(rho);
  e.mu = m > 0.0 ? (e.K - e.A + 2.0 * e.R) / m : 0.0;
  return e;
}

EnergyBreakdown evaluate_extended(const Density2D& unit_rho, const MHParams& params,
                                  const MHContext& ctx) {
  return evaluate(to_plain(unit_rho, params.lambda), params, ctx);
}

double residual(const Density2D& rho, const MHParams& params, const MHContext& ctx) {
  params.validate();
  rho.validate();
  Discretization d(ctx, params);
  std::vector<double> amp(rho.values.size());
  for (std::size_t k = 0; k < amp.size(); ++k) amp[k] = std::sqrt(rho.values[k]);
  return d.make_state(d.restrict_to_unknowns(amp)).residual;
}

Solution minimize(const MHParams& params, const MHContext& ctx, const SolverOptions& opts) {
  params.validate();
  Solution sol = run_flow(params, ctx, opts);
  if (!is_overcritical(sol, opts)) return sol;
  sol.overcritical = true;
  if (!opts.clamp_overcritical) return sol;

  SolverOptions inner = opts;
  inner.clamp_overcritical = false;
  const CriticalCharge crit = find_critical_charge(params, ctx, inner);
  MHParams clamped = params;
  clamped.lambda = crit.lambda_c;
  inner.start = sol.density.values;
  Solution out = run_flow(clamped, ctx, inner);
  out.params = params;
  out.overcritical = true;
  out.critical_charge = crit.lambda_c;
  return out;
}

double chemical_potential(const Solution& sol) {
  if (!sol.converged) throw InvalidArgument("chemical potential needs a converged solution");
  return sol.breakdown.mu;
}

MomentResult magnetic_moment(const MHParams& params, const MHContext& ctx,
                             const SolverOptions& opts, double step) {
  params.validate();
  MomentResult out;
  out.step = step > 0.0 ? step : std::max(1e-3, 1e-2 * params.beta);
  out.center = minimize(params, ctx, opts);
  SolverOptions warm = opts;
  warm.start = out.center.density.values;
  auto energy_at = [&](double beta) {
    MHParams p = params;
    p.beta = beta;
    return minimize(p, ctx, warm).breakdown.E;
  };
  const double h = out.step;
  const double e0 = out.center.breakdown.E;
  if (params.beta >= h) {
    out.theta = (energy_at(params.beta + h) - energy_at(params.beta - h)) / (2.0 * h);
  } else {
    const double e1 = energy_at(params.beta + h), e2 = energy_at(params.beta + 2.0 * h);
    out.theta = (-3.0 * e0 + 4.0 * e1 - e2) / (2.0 * h);
  }
  out.center.theta = out.theta;
  const auto& b = out.center.breakdown;
  out.identity_defect = params.beta * out.theta - 0.5 * (b.K - std::abs(b.E));
  return out;
}

ExtendedEnergy extended_energy(const MHParams& params, const MHContext& ctx,
                               const SolverOptions& opts) {
  params.validate();
  if (!(params.alpha > 0.0)) throw InvalidArgument("extended energy needs alpha > 0");
  ExtendedEnergy out;
  out.direct_solution = minimize(params, ctx, opts);
  out.direct = out.direct_solution.breakdown.E;

  MHParams plain;
  plain.lambda = params.alpha * params.lambda / params.zeta;
  plain.beta = params.beta / (params.zeta * params.zeta);
  const double factor = params.zeta * params.zeta * params.zeta / params.alpha;
  SolverOptions plain_opts = opts;
  plain_opts.start.reset();
  if (params.zeta == 1.0) {
    out.scaled_solution = minimize(plain, ctx, plain_opts);
  } else {
    const MHContext stretched(std::make_shared<const Grid2D>(ctx.grid().scaled(params.zeta)));
    out.scaled_solution = minimize(plain, stretched, plain_opts);
  }
  out.via_scaling = factor * out.scaled_solution.breakdown.E;
  out.relative_mismatch = std::abs(out.direct - out.via_scaling) / std::abs(out.via_scaling);
  return out;
}

CriticalCharge find_critical_charge(const MHParams& params, const MHContext& ctx,
                                    const SolverOptions& opts) {
  params.validate();
  SolverOptions inner = opts;
  inner.clamp_overcritical = false;
  const double unit = params.zeta / std::max(params.alpha, 1e-300);
  const double ceiling = opts.critical_ceiling > 0.0
                             ? opts.critical_ceiling
                             : unit * (2.0 + 0.5 * (1.0 + params.beta / (params.zeta * params.zeta)));
  const double width = opts.critical_width;

  CriticalCharge out;
  struct Probe {
    double lambda, mu, energy;
    std::vector<double> density;
  };
  std::optional<std::vector<double>> warm = opts.start;
  auto probe = [&](double lambda) {
    MHParams p = params;
    p.lambda = lambda;
    inner.start = warm;
    Solution s = run_flow(p, ctx, inner);
    ++out.solves;
    warm = s.density.values;
    return Probe{lambda, s.breakdown.mu, s.breakdown.E, std::move(s.density.values)};
  };

  Probe lo = probe(unit);
  while (lo.mu >= 0.0) {
    if (lo.lambda < 0.2 * unit) throw SolverError("no subcritical charge found", 0.0, out.solves);
    lo = probe(lo.lambda - 0.1 * unit);
  }
  double step = 0.1 * unit;
  Probe hi = probe(lo.lambda + step);
  while (hi.mu < 0.0) {
    lo = std::move(hi);
    step *= 1.5;
    if (lo.lambda + step > ceiling) {
      std::ostringstream msg;
      msg << "critical charge exceeds the search ceiling " << ceiling;
      throw SolverError(msg.str(), 0.0, out.solves);
    }
    warm = lo.density;
    hi = probe(lo.lambda + step);
  }

  auto update = [&](Probe p) {
    if (p.mu < 0.0)
      lo = std::move(p);
    else
      hi = std::move(p);
  };
  while (hi.lambda - lo.lambda > width) {
    const double gap = hi.lambda - lo.lambda;
    double x = lo.lambda - lo.mu * gap / (hi.mu - lo.mu);
    const double margin = std::min(0.45 * width, 0.25 * gap);
    x = std::clamp(x, lo.lambda + margin, hi.lambda - margin);
    warm = lo.density;
    Probe p = probe(x);
    const bool below = p.mu < 0.0;
    update(std::move(p));
    if (hi.lambda - lo.lambda <= width) break;
    // Try to close the bracket from the other side of the secant estimate.
    const double y = below ? std::min(x + 0.9 * width, hi.lambda - 0.05 * width)
                           : std::max(x - 0.9 * width, lo.lambda + 0.05 * width);
    warm = lo.density;
    update(probe(y));
  }
  out.lower = lo.lambda;
  out.upper = hi.lambda;
  out.mu_lower = lo.mu;
  out.mu_upper = hi.mu;
  out.energy_lower = lo.energy;
  out.energy_upper = hi.energy;
  out.lambda_c = lo.lambda - lo.mu * (hi.lambda - lo.lambda) / (hi.mu - lo.mu);
  return out;
}

}  // namespace bosatom
