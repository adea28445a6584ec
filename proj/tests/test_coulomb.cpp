#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <unistd.h>

#include "bosatom/coulomb.hpp"

using namespace bosatom;
using std::numbers::pi;

namespace {

double hydrogen_density(double r, double z) { return std::exp(-std::hypot(r, z)) / (8.0 * pi); }

// Potential of a spherical density from shells:
// (1/s) int_0^s 4 pi t^2 rho dt + int_s^inf 4 pi t rho dt, by Simpson.
template <class F>
double shell_potential(F rho, double s, double t_max = 60.0, int n = 20000) {
  auto simpson = [&](auto f, double a, double b) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return acc * h / 3.0;
  };
  const double inner = simpson([&](double t) { return 4 * pi * t * t * rho(t); }, 0.0, s);
  const double outer = simpson([&](double t) { return 4 * pi * t * rho(t); }, s, t_max);
  return inner / s + outer;
}

struct Setup {
  GridPtr grid;
  KernelPtr kernel;
};

Setup hydrogen_setup() {
  static Setup s = [] {
    auto g = build_grid(24.0, 24.0, 193, 385);
    return Setup{g, build_kernel(g)};
  }();
  return s;
}

}  // namespace

TEST_CASE("origin cell average of 1/|x| against quadrature") {
  for (auto [b, c] : {std::pair{0.5, 0.5}, {0.1, 0.3}, {1.0, 0.2}}) {
    // (1 / (pi b^2 2c)) int_0^b 2 pi r dr int_{-c}^{c} dz / sqrt(r^2 + z^2)
    auto inner = [&](double r) {
      return 2.0 * pi * r * 2.0 * std::asinh(c / r);
    };
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(inner, 0.0, b, 15, 1e-13);
    CHECK(origin_cell_inverse_distance(b, c) == doctest::Approx(q / (pi * b * b * 2 * c)).epsilon(1e-10));
  }
}

TEST_CASE("kernel table properties") {
  auto g = build_grid(3.0, 3.0, 13, 25);
  const AziKernel k(g);
  for (int i = 0; i < g->n_r(); ++i)
    for (int ip = 0; ip < g->n_r(); ++ip)
      for (int dj = -24; dj <= 24; ++dj) {
        const double v = k.value(i, ip, dj);
        REQUIRE(v > 0.0);
        REQUIRE(v == k.value(ip, i, -dj));
        if (i == ip && dj == 0) continue;
        REQUIRE(v <= 1.0 / std::hypot(g->r(i) - g->r(ip), dj * g->h_z()) * (1 + 1e-14));
        if (ip == 0) REQUIRE(v == doctest::Approx(1.0 / std::hypot(g->r(i), dj * g->h_z())).epsilon(1e-14));
      }
}

TEST_CASE("FFT convolution matches the direct Toeplitz sum") {
  auto g = build_grid(4.0, 5.0, 17, 41);
  const AziKernel k(g);
  std::vector<double> q(g->size());
  for (std::size_t n = 0; n < q.size(); ++n) q[n] = std::sin(0.37 * n) + 1.5;
  std::vector<double> a(q.size()), b(q.size());
  k.convolve(q, a);
  k.convolve_direct(q, b);
  for (std::size_t n = 0; n < q.size(); ++n) REQUIRE(a[n] == doctest::Approx(b[n]).epsilon(1e-11));
}

TEST_CASE("hydrogen attraction, repulsion and potential") {
  const auto s = hydrogen_setup();
  Density2D rho(s.grid, sample(*s.grid, hydrogen_density));
  // <1/|x|> = 1/2 and D = (1/2)(5/16)
  CHECK(attraction_energy(rho) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(direct_energy(rho, *s.kernel) == doctest::Approx(5.0 / 32.0).epsilon(0.02));

  const auto phi = hartree_potential(rho, *s.kernel);
  auto radial = [](double t) { return std::exp(-t) / (8.0 * pi); };
  for (int j : {s.grid->z_center() + 8, s.grid->z_center() + 40, s.grid->z_center() + 120}) {
    const double z = s.grid->z(j);
    CAPTURE(z);
    CHECK(phi.values[s.grid->index(0, j)] == doctest::Approx(shell_potential(radial, z)).epsilon(0.02));
    // closed form (1/z)(1 - e^{-z}(1 + z/2))
    CHECK(shell_potential(radial, z) == doctest::Approx((1 - std::exp(-z) * (1 + z / 2)) / z).epsilon(1e-6));
  }
}

TEST_CASE("zero density gives zero everywhere") {
  const auto s = hydrogen_setup();
  Density2D zero(s.grid);
  CHECK(attraction_energy(zero) == 0.0);
  CHECK(direct_energy(zero, *s.kernel) == 0.0);
  for (double v : hartree_potential(zero, *s.kernel).values) REQUIRE(v == 0.0);
}

TEST_CASE("off-axis support is attracted less than the same mass at the nucleus") {
  auto g = build_grid(6.0, 6.0, 49, 97);
  auto blob = Density2D(g, sample(*g, [](double r, double z) { return std::exp(-2 * (r * r + z * z)); }));
  auto ring = Density2D(g, sample(*g, [](double r, double z) { return std::exp(-4 * ((r - 3) * (r - 3) + z * z)); }));
  const double scale = mass(blob) / mass(ring);
  for (double& v : ring.values) v *= scale;
  CHECK(mass(ring) == doctest::Approx(mass(blob)));
  CHECK(attraction_energy(ring) < attraction_energy(blob));
}

TEST_CASE("far field of a compact density is mass over distance") {
  auto g = build_grid(20.0, 20.0, 81, 161);
  const AziKernel k(g);
  Density2D rho(g, sample(*g, [](double r, double z) { return std::exp(-4 * (r * r + z * z)); }));
  const double m = mass(rho);
  const auto phi = hartree_potential(rho, k);
  for (auto [i, j] : {std::pair{80, 80}, {80, 160}, {0, 160}, {40, 150}}) {
    const double d = std::hypot(g->r(i), g->z(j));
    CHECK(phi.values[g->index(i, j)] == doctest::Approx(m / d).epsilon(0.01));
  }
}

TEST_CASE("repulsion is bounded by the attraction at the best nucleus position") {
  auto g = build_grid(10.0, 10.0, 49, 97);
  const AziKernel k(g);
  Density2D rho(g, sample(*g, [](double r, double z) { return std::exp(-r - 0.5 * std::abs(z - 1.0)); }));
  const auto phi = hartree_potential(rho, k);
  CHECK(2.0 * direct_energy(rho, k) < mass(rho) * max_axis_potential(phi));
}

TEST_CASE("direct energy is positive and strictly convex") {
  auto g = build_grid(8.0, 8.0, 33, 65);
  const AziKernel k(g);
  Density2D a(g, sample(*g, [](double r, double z) { return std::exp(-r * r - (z - 1) * (z - 1)); }));
  Density2D b(g, sample(*g, [](double r, double z) { return std::exp(-0.5 * (r * r + (z + 2) * (z + 2))); }));
  const double s = mass(a) / mass(b);
  for (double& v : b.values) v *= s;
  Density2D mid(g);
  for (std::size_t n = 0; n < mid.values.size(); ++n) mid.values[n] = 0.5 * (a.values[n] + b.values[n]);
  CHECK(direct_energy(a, k) > 0.0);
  CHECK(direct_energy(b, k) > 0.0);
  CHECK(direct_energy(mid, k) < 0.5 * (direct_energy(a, k) + direct_energy(b, k)));
}

TEST_CASE("kernel cache round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("bosatom-test-cache-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  auto g = build_grid(3.0, 4.0, 11, 21);
  auto built = load_or_build_kernel(g, dir);
  REQUIRE(fs::exists(dir));
  auto again = load_or_build_kernel(g, dir);
  for (int i = 0; i < g->n_r(); ++i)
    for (int dj = -20; dj <= 20; ++dj) REQUIRE(again->value(i, 3, dj) == built->value(i, 3, dj));

  // same file, different grid: rejected
  fs::path file;
  for (const auto& e : fs::directory_iterator(dir)) file = e.path();
  CHECK_FALSE(AziKernel::load(file, build_grid(3.0, 4.0, 11, 23)).has_value());
  CHECK_FALSE(AziKernel::load(dir / "missing.bin", g).has_value());

  ::setenv("BOSATOM_CACHE_DIR", (dir / "env").c_str(), 1);
  load_or_build_kernel(g);
  ::unsetenv("BOSATOM_CACHE_DIR");
  CHECK(fs::exists(dir / "env"));
  CHECK_FALSE(fs::is_empty(dir / "env"));
  fs::remove_all(dir);
}
