#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bosatom/regimes.hpp"

using namespace bosatom;
using std::numbers::pi;

namespace {

const MHContext& ctx() {
  static const MHContext c(build_grid(16.0, 16.0, 65, 129));
  return c;
}

// Random smooth density: a few axisymmetric Gaussian bumps on the axis or off it.
Density2D random_density(std::mt19937_64& rng, const GridPtr& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Bump {
    double a, r0, z0, w;
  };
  std::vector<Bump> bumps(1 + rng() % 4);
  for (auto& b : bumps) b = {0.2 + u(rng), 3.0 * u(rng), 6.0 * u(rng) - 3.0, 0.4 + 1.5 * u(rng)};
  return Density2D(g, sample(*g, [&](double r, double z) {
                     double s = 0.0;
                     for (const auto& b : bumps)
                       s += b.a * std::exp(-((r - b.r0) * (r - b.r0) + (z - b.z0) * (z - b.z0)) / (b.w * b.w));
                     return s;
                   }));
}

}  // namespace

TEST_CASE("kinetic energy is nonnegative") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  auto g = build_grid(4.0, 4.0, 17, 33);
  for (int trial = 0; trial < 50; ++trial) {
    Wave2D psi(g);
    for (double& v : psi.values) v = n(rng);
    CHECK(kinetic_energy(psi) >= 0.0);
  }
  CHECK(kinetic_energy(Wave2D(g)) == 0.0);
}

TEST_CASE("Sobolev inequality on random smooth densities") {
  std::mt19937_64 rng(2);
  const double s = 3.0 * std::pow(pi / 2.0, 4.0 / 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto rho = random_density(rng, ctx().grid_ptr());
    const double k = kinetic_energy(Wave2D::from_density(rho));
    CAPTURE(trial);
    CHECK(k >= s * std::cbrt(cubic_integral(rho)));
  }
}

TEST_CASE("energy bookkeeping and positivity on random densities") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 15; ++trial) {
    const auto rho = random_density(rng, ctx().grid_ptr());
    MHParams p;
    p.beta = u(rng);
    p.lambda = mass(rho);
    const auto e = evaluate(rho, p, ctx());
    CHECK(e.E == e.K - e.A + e.R);
    CHECK(e.A > 0.0);
    CHECK(e.R > 0.0);
    CHECK(e.K - diamagnetic_term(rho, p.beta) >= 0.0);
  }
}

TEST_CASE("direct energy is convex along random segments") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_density(rng, ctx().grid_ptr());
    auto b = random_density(rng, ctx().grid_ptr());
    const double s = mass(a) / mass(b);
    for (double& v : b.values) v *= s;
    Density2D m(ctx().grid_ptr());
    for (std::size_t k = 0; k < m.values.size(); ++k) m.values[k] = 0.5 * (a.values[k] + b.values[k]);
    const auto& K = ctx().kernel();
    CHECK(direct_energy(m, K) < 0.5 * (direct_energy(a, K) + direct_energy(b, K)));
  }
}

TEST_CASE("minimizers are even in z") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    MHParams p;
    p.lambda = 0.3 + 0.8 * u(rng);
    p.beta = 2.0 * u(rng);
    const auto sol = minimize(p, ctx());
    const auto& g = ctx().grid();
    double worst = 0.0, top = 0.0;
    for (int i = 0; i < g.n_r(); ++i)
      for (int j = 0; j < g.n_z(); ++j) {
        const double a = sol.density.values[g.index(i, j)], b = sol.density.values[g.index(i, g.n_z() - 1 - j)];
        worst = std::max(worst, std::abs(a - b));
        top = std::max(top, a);
      }
    CAPTURE(p.lambda);
    CAPTURE(p.beta);
    CHECK(worst <= 1e-12 * top);
  }
}

TEST_CASE("energy is convex and decreasing in the charge for random fields") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int trial = 0; trial < 2; ++trial) {
    MHParams p;
    p.beta = u(rng);
    const auto r = lambda_scan(p, {0.3, 0.6, 0.9, 1.2}, ctx(), {}, 4);
    CAPTURE(p.beta);
    CHECK(r.passed());
  }
}

TEST_CASE("random starts reach the same minimizer") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2; ++trial) {
    MHParams p;
    p.lambda = 0.4 + 0.6 * u(rng);
    p.beta = u(rng);
    const auto r = uniqueness_probe(p, ctx(), {}, rng(), rng());
    CAPTURE(p.lambda);
    CHECK(r.passed());
  }
}
