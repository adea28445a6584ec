#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bosatom/mh_solver.hpp"

using namespace bosatom;
using std::numbers::pi;

namespace {

const MHContext& base() {
  static const MHContext ctx(build_grid(30.0, 30.0, 129, 257));
  return ctx;
}

const MHContext& coarse() {
  static const MHContext ctx(build_grid(20.0, 20.0, 65, 129));
  return ctx;
}

const MHContext& fine() {
  static const MHContext ctx(build_grid(20.0, 20.0, 129, 257));
  return ctx;
}

Density2D hydrogen(const GridPtr& g, double scale = 1.0) {
  return Density2D(g, sample(*g, [scale](double r, double z) { return scale * std::exp(-std::hypot(r, z)) / (8.0 * pi); }));
}

MHParams params(double lambda, double beta, double zeta = 1.0, double alpha = 1.0) {
  MHParams p;
  p.lambda = lambda;
  p.beta = beta;
  p.zeta = zeta;
  p.alpha = alpha;
  return p;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params(0.0, 0.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(1.0, -1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(1.0, 0.0, 0.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(1.0, 0.0, 1.0, -1.0).validate(), InvalidArgument);
  CHECK_NOTHROW(params(1.0, 0.0, 1.0, 0.0).validate());
}

TEST_CASE("evaluate on the hydrogen density") {
  const auto& ctx = base();
  const auto e = evaluate(hydrogen(ctx.grid_ptr()), params(1.0, 0.0), ctx);
  // K = 1/4, A = 1/2, R = (1/2)(5/16)
  CHECK(e.K == doctest::Approx(0.25).epsilon(0.02));
  CHECK(e.A == doctest::Approx(0.5).epsilon(0.02));
  CHECK(e.R == doctest::Approx(5.0 / 32.0).epsilon(0.02));
  CHECK(e.E == doctest::Approx(0.25 - 0.5 + 5.0 / 32.0).epsilon(0.02));
  CHECK(e.E == e.K - e.A + e.R);

  const auto z = evaluate(Density2D(ctx.grid_ptr()), params(1.0, 0.3), ctx);
  CHECK(z.K == 0.0);
  CHECK(z.A == 0.0);
  CHECK(z.R == 0.0);
  CHECK(z.E == 0.0);

  const auto rho = hydrogen(ctx.grid_ptr());
  CHECK(e.K == kinetic_energy(Wave2D::from_density(rho)));

  auto bad = rho;
  bad.values[100] = -1.0;
  CHECK_THROWS_AS(evaluate(bad, params(1.0, 0.0), ctx), InvalidArgument);
}

TEST_CASE("small charge is bracketed by hydrogen energies") {
  const auto& ctx = base();
  const auto sol = minimize(params(0.1, 0.0), ctx);
  REQUIRE(sol.converged);
  CHECK(sol.residual <= 1e-6);
  // lambda E_hyd(1) < E < lambda E_hyd(1 - lambda/2), E_hyd(zeta) = -zeta^2/4
  CHECK(sol.breakdown.E > -0.025);
  CHECK(sol.breakdown.E < -0.1 * 0.95 * 0.95 / 4.0);
  // the hydrogen density, normalized on the grid, is a trial state
  auto trial = hydrogen(ctx.grid_ptr());
  const double m = mass(trial);
  for (auto& v : trial.values) v *= 0.1 / m;
  CHECK(sol.breakdown.E <= evaluate(trial, params(0.1, 0.0), ctx).E);
  CHECK(sol.mass <= 0.1 * (1 + 1e-9));
}

TEST_CASE("energy bounds at unit charge") {
  const auto& ctx = base();
  const auto s0 = minimize(params(1.0, 0.0), ctx);
  CHECK(s0.breakdown.E >= -0.25);
  CHECK(s0.breakdown.E <= -0.0625);
  const auto s1 = minimize(params(1.0, 1.0), ctx);
  CHECK(s1.breakdown.E >= -1.25);
  CHECK(s1.breakdown.E >= s0.breakdown.E - 1.0);
  // E(1, 1) <= E(1, 0) - 1 + (1/4) int r^2 rho_0
  CHECK(s1.breakdown.E <= s0.breakdown.E - 1.0 + 0.25 * radial_second_moment(s0.density));
}

TEST_CASE("residual of converged and perturbed densities") {
  const auto& ctx = coarse();
  const auto p = params(0.6, 0.2);
  const auto sol = minimize(p, ctx);
  const double r0 = residual(sol.density, p, ctx);
  CHECK(r0 <= 1e-6 * (1 + 1e-9));
  auto bent = sol.density;
  const auto& g = ctx.grid();
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_z(); ++j) bent.values[g.index(i, j)] *= 1.0 + 0.1 * std::sin(g.z(j));
  CHECK(residual(bent, p, ctx) > r0);
}

TEST_CASE("hydrogen solves the equation without repulsion") {
  // the cusp limits the rate, but the residual must fall under refinement
  const auto no_rep = params(1.0, 0.0, 1.0, 0.0);
  const double r_coarse = residual(hydrogen(coarse().grid_ptr()), no_rep, coarse());
  const double r_fine = residual(hydrogen(fine().grid_ptr()), no_rep, fine());
  const double r_bent = residual(hydrogen(fine().grid_ptr()), params(1.0, 0.0, 1.0, 1.0), fine());
  CHECK(r_fine < r_coarse);
  CHECK(r_fine < 0.5 * r_bent);
}

TEST_CASE("chemical potential: sign, relation, derivative") {
  const auto& ctx = base();
  const double lam = 0.1, d = 0.01 * lam;
  const auto sol = minimize(params(lam, 0.0), ctx);
  const double mu = chemical_potential(sol);
  CHECK(mu < 0.0);
  CHECK(lam * mu == doctest::Approx(sol.breakdown.E + sol.breakdown.R).epsilon(1e-2));
  const double ep = minimize(params(lam + d, 0.0), ctx).breakdown.E;
  const double em = minimize(params(lam - d, 0.0), ctx).breakdown.E;
  CHECK(mu == doctest::Approx((ep - em) / (2 * d)).epsilon(1e-2));

  Solution unconverged = sol;
  unconverged.converged = false;
  CHECK_THROWS_AS(chemical_potential(unconverged), InvalidArgument);
}

TEST_CASE("overcritical charge is clamped with vanishing chemical potential") {
  const auto& ctx = coarse();
  const auto sol = minimize(params(1.6, 0.0), ctx);
  REQUIRE(sol.critical_charge.has_value());
  CHECK(*sol.critical_charge > 1.0);
  CHECK(*sol.critical_charge < 1.6);
  CHECK(sol.mass == doctest::Approx(*sol.critical_charge).epsilon(1e-6));
  CHECK(std::abs(sol.breakdown.mu) <= 2e-3 * std::abs(sol.breakdown.E));
}

TEST_CASE("non-convergence is reported") {
  SolverOptions o;
  o.max_iter = 3;
  CHECK_THROWS_AS(minimize(params(1.0, 0.0), coarse(), o), ConvergenceError);
}

TEST_CASE("magnetic moment identity and step stability") {
  const auto& ctx = coarse();
  const auto p = params(0.5, 0.5);
  const auto m = magnetic_moment(p, ctx, {}, 1e-2);
  const auto& b = m.center.breakdown;
  CHECK(std::abs(p.beta * m.theta - 0.5 * (b.K - std::abs(b.E))) <= 1e-2 * std::abs(b.E));
  const auto half = magnetic_moment(p, ctx, {}, 5e-3);
  CHECK(half.theta == doctest::Approx(m.theta).epsilon(1e-3));
  // theta(beta -> 0) -> -lambda
  const auto zero = magnetic_moment(params(0.5, 0.0), ctx, {}, 1e-3);
  CHECK(zero.theta == doctest::Approx(-0.5).epsilon(0.02));
}

TEST_CASE("extended functional") {
  const auto& ctx = base();
  const auto plain = minimize(params(0.7, 0.3), ctx);
  const auto same = extended_energy(params(0.7, 0.3), ctx);
  CHECK(same.direct == plain.breakdown.E);
  CHECK(same.via_scaling == plain.breakdown.E);

  const auto e = extended_energy(params(1.0, 0.0, 2.0, 1.0), ctx);
  CHECK(e.relative_mismatch <= 1e-3);
  // (zeta^3 / alpha) E(alpha lambda / zeta, beta / zeta^2) = 8 E(1/2, 0)
  const auto half = minimize(params(0.5, 0.0), MHContext(std::make_shared<Grid2D>(ctx.grid().scaled(2.0))));
  CHECK(e.via_scaling == doctest::Approx(8.0 * half.breakdown.E).epsilon(1e-9));

  // no repulsion: the hydrogen energy -1/4, approached under refinement
  const double e_coarse = extended_energy(params(1.0, 0.0, 1.0, 1e-6), coarse()).direct;
  const double e_fine = extended_energy(params(1.0, 0.0, 1.0, 1e-6), fine()).direct;
  CHECK(std::abs(e_fine + 0.25) < 0.5 * std::abs(e_coarse + 0.25));
  CHECK(e_fine == doctest::Approx(-0.25).epsilon(5e-3));
  CHECK_THROWS_AS(extended_energy(params(1.0, 0.0, 1.0, 0.0), ctx), InvalidArgument);
}

TEST_CASE("plain and extended densities convert exactly") {
  auto g = build_grid(5.0, 5.0, 17, 33);
  Density2D rho(g, sample(*g, [](double r, double z) { return std::exp(-r - z * z); }));
  const auto back = to_plain(to_extended(rho, 1.7), 1.7);
  for (std::size_t k = 0; k < rho.values.size(); ++k) CHECK(back.values[k] == doctest::Approx(rho.values[k]).epsilon(1e-15));
}

TEST_CASE("critical charge search") {
  const auto c = find_critical_charge(params(1.0, 0.0), coarse());
  CHECK(c.lambda_c > 1.0);
  CHECK(c.upper - c.lower <= 0.01 + 1e-12);
  CHECK(c.mu_lower < 0.0);
  CHECK(c.mu_upper >= 0.0);
}
