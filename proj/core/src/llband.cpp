#include "bosatom/llband.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "bosatom/grid.hpp"
#include "csv.hpp"
#include "line_problem.hpp"

namespace bosatom {

double l_of_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
  const double target = std::sqrt(beta);
  auto f = [&](double l) { return l * std::sinh(0.5 * l) - target; };
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  double l = hi;
  for (int it = 0; it < 200; ++it) {
    const double fl = f(l);
    (fl < 0.0 ? lo : hi) = l;
    const double df = std::sinh(0.5 * l) + 0.5 * l * std::cosh(0.5 * l);
    double next = l - fl / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - l) <= 1e-12 * next) return next;
    l = next;
  }
  return l;
}

namespace {

constexpr double kCutA = 12.0;  // e^{-r^2/2} below 1e-31
constexpr double kCutR = 17.0;  // e^{-s^2/4} below 1e-31

/// int_0^cut f, split at the transition radius where the kernel changes shape.
/// tanh-sinh copes with the logarithmic endpoint behaviour at r = 0.
template <class F>
double radial(F f, double split, double cut) {
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  const double tol = 1e-13;
  if (!(split > 0.0) || split >= cut) return ts.integrate(f, 0.0, cut, tol);
  return ts.integrate(f, 0.0, split, tol) + ts.integrate(f, split, cut, tol);
}

struct Weight {
  double cut;
  double (*w)(double);
};
double weight_a(double r) { return r * std::exp(-0.5 * r * r); }
double weight_r(double s) { return 0.5 * s * std::exp(-0.25 * s * s); }

struct Moments {
  double v, dv, f0, f1;
};

/// V, V', int_0^u V and int_0^u t V for the weight w at separation u >= 0.
Moments kernel_moments(const Weight& wt, double beta, double L, double u) {
  const double c = L / std::sqrt(beta);
  Moments m{};
  if (u == 0.0) {
    // int w(r) / (c r) dr
    m.v = radial([&](double r) { return r > 0.0 ? wt.w(r) / r : 0.0; }, 0.0, wt.cut) / (L * c);
    return m;
  }
  const double split = u / c;
  m.v = radial([&](double r) { return wt.w(r) / std::hypot(c * r, u); }, split, wt.cut) / L;
  m.dv = -u * radial([&](double r) { return wt.w(r) / std::pow(std::hypot(c * r, u), 3); }, split, wt.cut) / L;
  m.f0 = radial([&](double r) { return r > 0.0 ? wt.w(r) * std::asinh(u / (c * r)) : 0.0; }, split, wt.cut) / L;
  m.f1 = radial([&](double r) { return wt.w(r) * u * u / (std::hypot(c * r, u) + c * r); }, split, wt.cut) / L;
  return m;
}

std::size_t locate(const std::vector<double>& u, double x) {
  auto it = std::upper_bound(u.begin(), u.end(), x);
  std::size_t i = static_cast<std::size_t>(it - u.begin());
  return std::clamp<std::size_t>(i, 1, u.size() - 1) - 1;
}

double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double h = x1 - x0, t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

}  // namespace

EffectiveKernels::EffectiveKernels(double beta, double u_max, double ratio)
    : beta_(beta), L_(l_of_beta(beta)) {
  if (!(u_max > 0.0) || !(ratio > 1.0)) throw InvalidArgument("invalid kernel table range");
  u_.push_back(0.0);
  for (double x = 1e-6; ; x *= ratio) {
    u_.push_back(std::min(x, u_max));
    if (x >= u_max) break;
  }
  const Weight wa{kCutA, weight_a}, wr{kCutR, weight_r};
  for (Table* t : {&a_, &r_}) {
    t->v.resize(u_.size());
    t->f0.resize(u_.size());
    t->f1.resize(u_.size());
  }
  dva_.resize(u_.size());
  dvr_.resize(u_.size());
  for (std::size_t i = 0; i < u_.size(); ++i) {
    const Moments ma = kernel_moments(wa, beta_, L_, u_[i]);
    const Moments mr = kernel_moments(wr, beta_, L_, u_[i]);
    a_.v[i] = ma.v;
    a_.f0[i] = ma.f0;
    a_.f1[i] = ma.f1;
    dva_[i] = ma.dv;
    r_.v[i] = mr.v;
    r_.f0[i] = mr.f0;
    r_.f1[i] = mr.f1;
    dvr_[i] = mr.dv;
  }
}

double EffectiveKernels::va_quadrature(double beta, double L, double u) {
  return kernel_moments({kCutA, weight_a}, beta, L, std::abs(u)).v;
}

double EffectiveKernels::vr_quadrature(double beta, double L, double u) {
  return kernel_moments({kCutR, weight_r}, beta, L, std::abs(u)).v;
}

double EffectiveKernels::interp_v(const Table& t, const std::vector<double>& dv, double x) const {
  x = std::abs(x);
  if (x > u_.back() * (1.0 + 1e-12)) throw InvalidArgument("kernel argument outside the table");
  const std::size_t i = locate(u_, x);
  return hermite(u_[i], u_[i + 1], t.v[i], t.v[i + 1], dv[i], dv[i + 1], x);
}

double EffectiveKernels::interp_f0(const Table& t, double x) const {
  const double ax = std::abs(x);
  if (ax > u_.back() * (1.0 + 1e-12)) throw InvalidArgument("kernel argument outside the table");
  const std::size_t i = locate(u_, ax);
  const double g = hermite(u_[i], u_[i + 1], t.f0[i], t.f0[i + 1], t.v[i], t.v[i + 1], ax);
  return x < 0.0 ? -g : g;
}

double EffectiveKernels::interp_f1(const Table& t, double x) const {
  const double ax = std::abs(x);
  if (ax > u_.back() * (1.0 + 1e-12)) throw InvalidArgument("kernel argument outside the table");
  const std::size_t i = locate(u_, ax);
  return hermite(u_[i], u_[i + 1], t.f1[i], t.f1[i + 1], u_[i] * t.v[i], u_[i + 1] * t.v[i + 1], ax);
}

double EffectiveKernels::va(double u) const { return interp_v(a_, dva_, u); }
double EffectiveKernels::vr(double u) const { return interp_v(r_, dvr_, u); }
double EffectiveKernels::g0(double u) const { return interp_f0(a_, u); }
double EffectiveKernels::g1(double u) const { return interp_f1(a_, u); }
double EffectiveKernels::f0(double u) const { return interp_f0(r_, u); }
double EffectiveKernels::f1(double u) const { return interp_f1(r_, u); }

double EffectiveKernels::hat(const Table& t, const std::vector<double>& dv, double x0, double x1,
                             bool rising) const {
  const double h = x1 - x0;
  if (!(h > 0.0)) throw InvalidArgument("empty hat interval");
  const double near = std::min(std::abs(x0), std::abs(x1));
  if ((x0 <= 0.0 && x1 >= 0.0) || near <= 4.0 * h) {
    // Exact moments through the antiderivatives.
    const double d0 = interp_f0(t, x1) - interp_f0(t, x0);
    const double d1 = interp_f1(t, x1) - interp_f1(t, x0);
    return rising ? (d1 - x0 * d0) / h : (x1 * d0 - d1) / h;
  }
  // Far from the singular region V is smooth on the interval.
  auto f = [&](double x) {
    const double w = rising ? (x - x0) / h : (x1 - x) / h;
    return w * interp_v(t, dv, x);
  };
  return boost::math::quadrature::gauss<double, 8>::integrate(f, x0, x1);
}

double EffectiveKernels::hat_integral_a(double x0, double x1, bool rising) const {
  return hat(a_, dva_, x0, x1, rising);
}

double EffectiveKernels::hat_integral_r(double x0, double x1, bool rising) const {
  return hat(r_, dvr_, x0, x1, rising);
}

EffectiveKernels build_kernels(double beta, double u_max) { return EffectiveKernels(beta, u_max); }

void ConfinedParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw InvalidArgument("zeta must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be nonnegative");
}

namespace {

detail::LineProblem confined_problem(const ConfinedParams& params, const EffectiveKernels& k,
                                     const ConfinedGridOptions& grid) {
  if (2.0 * grid.z_max > k.u_max() * (1.0 + 1e-12))
    throw InvalidArgument("kernel table must cover twice the grid extent");
  detail::LineProblem p;
  p.nodes = detail::graded_half_nodes(grid.h0, grid.ratio, 1e300, grid.z_max);
  p.set_lumped_weights();
  const double l2 = k.L() * k.L();
  p.set_kinetic(l2);
  const int n = p.size();
  const auto& u = p.nodes;

  // Both halves of each hat; the hat at the origin is counted once.
  p.attraction.resize(n);
  p.attraction[0] = 2.0 * k.hat_integral_a(0.0, u[1], false);
  for (int l = 1; l < n; ++l)
    p.attraction[l] = 2.0 * (k.hat_integral_a(u[l - 1], u[l], true) + k.hat_integral_a(u[l], u[l + 1], false));
  p.attraction *= params.zeta * l2;

  // M(k, l) = int hat_l(u') V_R(u_k - u') du' over both mirror hats.
  Eigen::MatrixXd m(n, n);
  auto piece = [&](double uk, double x0, double x1, bool rising) {
    // t = uk - u' maps a rising weight on [x0, x1] to a falling one on [uk - x1, uk - x0]
    return k.hat_integral_r(uk - x1, uk - x0, !rising);
  };
  for (int r = 0; r < n; ++r) {
    const double uk = u[r];
    m(r, 0) = piece(uk, -u[1], 0.0, true) + piece(uk, 0.0, u[1], false);
    for (int l = 1; l < n; ++l) {
      m(r, l) = piece(uk, u[l - 1], u[l], true) + piece(uk, u[l], u[l + 1], false) +
                piece(uk, -u[l + 1], -u[l], true) + piece(uk, -u[l], -u[l - 1], false);
    }
  }
  const Eigen::MatrixXd wm = p.weight.asDiagonal() * m;
  p.repulsion = 0.5 * params.alpha * l2 * (wm + wm.transpose());
  return p;
}

HSDensity mirror(const std::vector<double>& nodes, const Eigen::VectorXd& psi) {
  const std::size_t half = nodes.size(), mid = half - 1;
  HSDensity d;
  d.z_nodes.resize(2 * half - 1);
  d.values.assign(2 * half - 1, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    const double v = k < static_cast<std::size_t>(psi.size()) ? psi[k] * psi[k] : 0.0;
    d.z_nodes[mid + k] = nodes[k];
    d.z_nodes[mid - k] = -nodes[k];
    d.values[mid + k] = d.values[mid - k] = v;
  }
  return d;
}

}  // namespace

ConfinedResult confined_minimize(const ConfinedParams& params, const EffectiveKernels& kernels,
                                 const ConfinedGridOptions& grid, const ConfinedOptions& opts) {
  params.validate();
  if (std::abs(kernels.beta() - params.beta) > 1e-12 * params.beta)
    throw InvalidArgument("kernels were built for a different beta");
  const detail::LineProblem p = confined_problem(params, kernels, grid);
  detail::LineOptions lo;
  lo.tol = opts.tol;
  lo.max_iter = opts.max_iter;

  // A probe that does not settle is leaking charge to the box edge: treat as unbound.
  detail::LineOptions probe = lo;
  probe.throw_on_failure = false;
  auto bound = [&](const detail::LineState& s, double m) {
    return s.converged && s.energy.mu <= opts.overcritical_mu_factor * std::abs(s.energy.E) / m;
  };
  double mass = params.lambda;
  detail::LineState st = detail::line_minimize(p, mass, params.alpha > 0.0 ? probe : lo);
  bool clamped = false;
  if (params.alpha > 0.0 && !bound(st, mass)) {
    // Regula falsi (Illinois) on mu(lambda) between a bound and an unbound charge;
    // unconverged probes only shrink the bracket.
    clamped = true;
    double hi = mass, mu_hi = std::max(st.energy.mu, 0.0);
    bool hi_known = st.converged;
    Eigen::VectorXd warm = st.psi;
    double lo_m = mass;
    detail::LineState lo_st;
    do {
      lo_m *= 0.8;
      lo_st = detail::line_minimize(p, lo_m, probe, warm);
      if (lo_st.converged) warm = lo_st.psi;
    } while (!(lo_st.converged && lo_st.energy.mu < 0.0) && lo_m > 1e-3 * mass);
    if (!(lo_st.converged && lo_st.energy.mu < 0.0))
      throw SolverError("no bound charge found for the confined band", lo_st.residual, lo_st.iterations);
    double mu_lo = lo_st.energy.mu;
    int side = 0;
    for (int it = 0; it < 200 && hi - lo_m > opts.critical_tol; ++it) {
      double x = hi_known ? lo_m - mu_lo * (hi - lo_m) / (mu_hi - mu_lo) : 0.5 * (lo_m + hi);
      x = std::clamp(x, lo_m + 0.01 * (hi - lo_m), hi - 0.01 * (hi - lo_m));
      detail::LineState s = detail::line_minimize(p, x, probe, lo_st.psi);
      if (s.converged && s.energy.mu < 0.0) {
        lo_m = x;
        mu_lo = s.energy.mu;
        lo_st = std::move(s);
        if (side == -1) mu_hi *= 0.5;
        side = -1;
      } else {
        hi = x;
        hi_known = s.converged;
        mu_hi = std::max(s.energy.mu, 0.0);
        if (side == 1) mu_lo *= 0.5;
        side = 1;
      }
    }
    st = std::move(lo_st);
    mass = lo_m;
  }

  ConfinedResult out;
  out.L = kernels.L();
  out.density = mirror(p.nodes, st.psi);
  out.energy = st.energy;
  out.K_psi = st.energy.K / (out.L * out.L);
  out.scaled_energy = st.energy.E / (out.L * out.L);
  out.residual = st.residual;
  out.iterations = st.iterations;
  out.bound_charge = mass;
  out.clamped = clamped;
  return out;
}

ConfinedResult confined_minimize(const ConfinedParams& params, const ConfinedGridOptions& grid,
                                 const ConfinedOptions& opts) {
  params.validate();
  return confined_minimize(params, EffectiveKernels(params.beta, 2.0 * grid.z_max), grid, opts);
}

double confined_attraction(const HSDensity& profile, const EffectiveKernels& kernels) {
  profile.validate();
  const auto& z = profile.z_nodes;
  double a = 0.0;
  for (std::size_t k = 0; k + 1 < z.size(); ++k)
    a += profile.values[k] * kernels.hat_integral_a(z[k], z[k + 1], false) +
         profile.values[k + 1] * kernels.hat_integral_a(z[k], z[k + 1], true);
  return a;
}

void write_confined_csv(std::ostream& os, const std::vector<ConfinedRow>& rows) {
  detail::CsvWriter csv(os, {"beta", "L", "E_conf", "E_conf_over_L2", "E_HS"});
  for (const auto& r : rows) csv.row({r.beta, r.L, r.energy, r.scaled, r.hs});
}

}  // namespace bosatom
