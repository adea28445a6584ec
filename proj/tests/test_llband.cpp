#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bosatom/llband.hpp"
#include "bosatom/mh_solver.hpp"

using namespace bosatom;
using std::numbers::pi;

namespace {

double bisect_l(double beta) {
  double lo = 0.0, hi = 100.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::sinh(mid / 2) < std::sqrt(beta) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Transverse average over the plane by a midpoint rule on [-W, W]^2.
template <class W>
double plane_average(W weight, double L, double beta, double u, int n = 1600, double half = 9.0) {
  const double h = 2 * half / n;
  double s = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double x = -half + (a + 0.5) * h, y = -half + (b + 0.5) * h;
      const double r2 = x * x + y * y;
      s += weight(r2) / (L * std::sqrt(L * L * r2 / beta + u * u));
    }
  return s * h * h;
}

ConfinedParams cparams(double lambda, double beta, double alpha = 1.0) {
  ConfinedParams p;
  p.lambda = lambda;
  p.beta = beta;
  p.alpha = alpha;
  return p;
}

}  // namespace

TEST_CASE("L(beta) solves its defining equation") {
  const double beta2 = std::pow(2.0 * std::sinh(1.0), 2);
  CHECK(l_of_beta(beta2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(l_of_beta(1e6) == doctest::Approx(bisect_l(1e6)).epsilon(1e-10));
  CHECK(l_of_beta(1e6) == doctest::Approx(10.50).epsilon(1e-3));
  double prev = 0.0;
  for (double b : {1e-3, 0.1, 1.0, 10.0, 1e2, 1e4, 1e8}) {
    const double L = l_of_beta(b);
    CHECK(L > prev);
    CHECK(L * std::sinh(L / 2) == doctest::Approx(std::sqrt(b)).epsilon(1e-12));
    prev = L;
  }
  // L / ln(beta) drifts toward 1
  CHECK(std::abs(l_of_beta(1e12) / std::log(1e12) - 1) < std::abs(l_of_beta(1e4) / std::log(1e4) - 1));
}

TEST_CASE("kernels against transverse brute force") {
  const double beta = 100.0, L = l_of_beta(beta), u = 1.0;
  const EffectiveKernels k(beta, 50.0);
  const double va = plane_average([](double r2) { return std::exp(-r2 / 2) / (2 * pi); }, L, beta, u);
  // the difference of two independent unit Gaussians in the plane
  const double vr = plane_average([](double r2) { return std::exp(-r2 / 4) / (4 * pi); }, L, beta, u, 1600, 13.0);
  CHECK(k.va(u) == doctest::Approx(va).epsilon(1e-4));
  CHECK(k.vr(u) == doctest::Approx(vr).epsilon(1e-4));
  CHECK(k.va(u) == doctest::Approx(EffectiveKernels::va_quadrature(beta, L, u)).epsilon(1e-8));
  CHECK(k.vr(u) == doctest::Approx(EffectiveKernels::vr_quadrature(beta, L, u)).epsilon(1e-8));
}

TEST_CASE("kernels are positive, even and decreasing") {
  const EffectiveKernels k(1e3, 40.0);
  double pa = INFINITY, pr = INFINITY;
  for (double u : {0.0, 1e-3, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 39.0}) {
    CAPTURE(u);
    CHECK(k.va(u) > 0.0);
    CHECK(k.vr(u) > 0.0);
    CHECK(k.va(u) == k.va(-u));
    CHECK(k.vr(u) == k.vr(-u));
    CHECK(k.va(u) < pa);
    CHECK(k.vr(u) < pr);
    CHECK(std::isfinite(k.va(u)));
    pa = k.va(u);
    pr = k.vr(u);
  }
  // tail: V(u) -> 1 / (L |u|)
  CHECK(k.va(39.0) * k.L() * 39.0 == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("integrated attraction kernel against the exchanged-order integral") {
  const double beta = 200.0, U = 30.0;
  const EffectiveKernels k(beta, 40.0);
  const double L = k.L();
  // int_{-U}^{U} V_A = (2/L) int r e^{-r^2/2} asinh(U sqrt(beta) / (L r)) dr
  boost::math::quadrature::exp_sinh<double> q;
  const double exact = 2.0 / L * q.integrate([&](double r) {
    return r * std::exp(-r * r / 2) * std::asinh(U * std::sqrt(beta) / (L * r));
  }, 1e-14);
  CHECK(2.0 * k.g0(U) == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("band attraction concentrates at the origin") {
  // the kernel tail 1/(L|u|) leaves a deviation of order 1/L; L dev settles
  std::vector<double> nodes;
  for (int k = -4000; k <= 4000; ++k) nodes.push_back(k * 0.01);
  const auto prof = hs_exact_profile(1.0, nodes);
  double prev_dev = INFINITY, prev_scaled = NAN, prev_step = INFINITY;
  for (double beta : {1e3, 1e4, 1e5, 1e6, 1e8, 1e10}) {
    const EffectiveKernels k(beta, 100.0);
    const double dev = std::abs(confined_attraction(prof, k) - hs_exact_density(1.0, 0.0));
    const double scaled = dev * k.L();
    CAPTURE(beta);
    CHECK(dev < prev_dev);
    if (!std::isnan(prev_scaled)) {
      const double step = std::abs(scaled - prev_scaled);
      CHECK(step < prev_step);
      prev_step = step;
    }
    prev_dev = dev;
    prev_scaled = scaled;
  }
  CHECK(prev_step < 0.01 * prev_scaled);
}

TEST_CASE("confined solution bookkeeping") {
  const auto r = confined_minimize(cparams(1.0, 100.0));
  CHECK(r.energy.K == r.L * r.L * r.K_psi);
  CHECK(r.energy.E == doctest::Approx(r.energy.K - r.energy.A + r.energy.R).epsilon(1e-14));
  CHECK(r.scaled_energy == doctest::Approx(r.energy.E / (r.L * r.L)).epsilon(1e-14));
  CHECK(r.density.mass() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(r.clamped);
  CHECK(r.scaled_energy > hs_energy_exact(1.0).E);
  CHECK_THROWS_AS(confined_minimize(cparams(1.0, -1.0)), InvalidArgument);
}

TEST_CASE("small charge approaches the confined hydrogen value") {
  const auto r = confined_minimize(cparams(1e-3, 1e3));
  const auto h = confined_minimize(cparams(1e-3, 1e3, 0.0));
  CHECK(r.energy.E / 1e-3 == doctest::Approx(h.energy.E / 1e-3).epsilon(0.05));
  CHECK(h.energy.R == 0.0);
}

TEST_CASE("overcritical charge is clamped in the band") {
  const auto r = confined_minimize(cparams(3.0, 100.0));
  CHECK(r.clamped);
  CHECK(r.bound_charge < 3.0);
  CHECK(r.bound_charge > 1.0);
}

TEST_CASE("confined energy equals the 2-D functional of the product state") {
  const double beta = 4.0;
  const auto c = confined_minimize(cparams(1.0, beta));
  const auto& u = c.density.z_nodes;
  const auto& v = c.density.values;
  auto profile = [&](double x) {
    x = std::abs(x);
    auto it = std::upper_bound(u.begin() + u.size() / 2, u.end(), x);
    if (it == u.end()) return 0.0;
    const std::size_t k = it - u.begin();
    const double t = (x - u[k - 1]) / (u[k] - u[k - 1]);
    const double a = (1 - t) * std::sqrt(v[k - 1]) + t * std::sqrt(v[k]);
    return a * a;
  };
  MHParams p;
  p.beta = beta;
  auto energy = [&](int nr, int nz) {
    auto g = build_grid(5.0, 20.0, nr, nz);
    const MHContext ctx(g);
    Density2D rho(g, sample(*g, [&](double r, double z) {
                    return beta / (2 * pi) * std::exp(-beta * r * r / 2) * c.L * profile(c.L * z);
                  }));
    return evaluate(rho, p, ctx).E;
  };
  const double coarse = energy(129, 257), fine = energy(257, 513);
  const double extrapolated = (4 * fine - coarse) / 3;
  CHECK(extrapolated == doctest::Approx(c.energy.E).epsilon(1e-3));
}

TEST_CASE("confined table export") {
  std::ostringstream os;
  write_confined_csv(os, {{100.0, 3.5, -1.6, -0.13, -0.14}});
  CHECK(os.str().rfind("beta,L,E_conf,E_conf_over_L2,E_HS\n", 0) == 0);
}
