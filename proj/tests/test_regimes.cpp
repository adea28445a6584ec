#include <doctest.h>

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bosatom/regimes.hpp"

using namespace bosatom;

namespace {

const MHContext& coarse() {
  static const MHContext ctx(build_grid(20.0, 20.0, 65, 129));
  return ctx;
}

// the virial defect is a discretization effect; this grid resolves it below 1e-2
const MHContext& virial_grid() {
  static const MHContext ctx(build_grid(30.0, 30.0, 129, 257));
  return ctx;
}

const Check* find(const ScanResult& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](int k) { hit[k] += 1; });
  for (int h : hit) CHECK(h == 1);

  std::atomic<int> ran{0};
  try {
    parallel_for(20, 3, [&](int k) {
      ++ran;
      if (k == 7 || k == 13) throw std::runtime_error("job " + std::to_string(k));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "job 7");
  }
  CHECK(ran == 20);
  parallel_for(0, 4, [](int) { FAIL("no jobs expected"); });
}

TEST_CASE("scan result bookkeeping") {
  ScanResult r;
  r.axis = "lambda";
  r.add("a", "always", true, 1.0, 2.0);
  r.note("b", "reported only", 3.0);
  CHECK(r.passed());
  r.add("c", "fails", false, 1.0, 0.0);
  CHECK_FALSE(r.passed());
  ScanResult other;
  other.add("d", "more", true, 0.0, 0.0);
  r.append(other);
  CHECK(r.checks.size() == 4);
  CHECK(r.checks[1].informational);

  ScanPoint p;
  p.parameter = 0.5;
  p.extra = {{"x", 1.5}};
  CHECK(p.get("x") == 1.5);
  r.points.push_back(p);
  ScanPoint q;
  q.parameter = 1.0;
  q.extra = {{"y", 2.0}};
  r.points.push_back(q);
  std::ostringstream os;
  write_scan_csv(os, r);
  const auto s = os.str();
  CHECK(s.rfind("lambda,E,K,A,R,mu,residual,iterations,converged,clamped,x,y\n", 0) == 0);
  CHECK(s.find("\n0.5,") != std::string::npos);
  CHECK(s.find("nan") != std::string::npos);
}

TEST_CASE("hyper-strong suite passes") {
  const auto r = hs_suite();
  for (const auto& c : r.checks) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }
}

TEST_CASE("charge ladder is decreasing, convex and per-charge increasing") {
  MHParams base;
  base.beta = 0.5;
  const auto r = lambda_scan(base, {0.25, 0.5, 0.75, 1.0, 1.25}, coarse(), {}, 2);
  CHECK(r.points.size() == 5);
  for (std::size_t k = 1; k < r.points.size(); ++k) CHECK(r.points[k].parameter > r.points[k - 1].parameter);
  CHECK(r.passed());
  CHECK(find(r, "convex[lambda=0.5]") != nullptr);
}

TEST_CASE("field ladder respects the diamagnetic bound") {
  MHParams base;
  base.lambda = 0.5;
  const auto factory = [](const MHParams&) { return coarse(); };
  const auto r = beta_scan(base, {0.0, 0.5, 2.0}, factory, {}, 3);
  CHECK(r.passed());
  for (const auto& p : r.points) CHECK(p.energy.E >= -(0.25 + p.parameter) * 0.5);
}

TEST_CASE("results do not depend on the number of workers") {
  MHParams base;
  const auto a = lambda_scan(base, {0.3, 0.6}, coarse(), {}, 1);
  const auto b = lambda_scan(base, {0.3, 0.6}, coarse(), {}, 2);
  std::ostringstream sa, sb;
  write_scan_csv(sa, a);
  write_scan_csv(sb, b);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("identity suite on a subcritical solution without field") {
  MHParams p;
  p.lambda = 0.5;
  const auto sol = minimize(p, virial_grid());
  IdentityOptions id;
  id.derivative = true;
  const auto r = identity_suite(sol, virial_grid(), {}, id);
  for (const char* name : {"bookkeeping", "mass_constraint", "chemical_potential_relation", "mu_negative",
                           "virial_inequality", "sobolev", "virial_kinetic", "virial_split", "mu_derivative"}) {
    CAPTURE(name);
    const Check* c = find(r, name);
    REQUIRE(c != nullptr);
    CHECK(c->pass);
  }
}

TEST_CASE("identity suite at the critical charge reports the ratios") {
  MHParams p;
  p.lambda = 1.6;
  const auto sol = minimize(p, virial_grid());
  REQUIRE(sol.critical_charge.has_value());
  IdentityOptions id;
  id.at_critical = true;
  const auto r = identity_suite(sol, virial_grid(), {}, id);
  CHECK(find(r, "mu_negative") == nullptr);
  const Check* ratios = find(r, "critical_ratios");
  REQUIRE(ratios != nullptr);
  CHECK(ratios->pass);
}

TEST_CASE("scaling audit") {
  const auto r = scaling_audit({{{1.0, 0.0, 2.0, 1.0}, 1e-3}, {{1.0, 0.0, 1.0, 1.0}, 1e-3}}, coarse(), {}, 2);
  CHECK(r.passed());
  const Check* id = find(r, "scaling[lambda=1,beta=0,zeta=1,alpha=1]");
  REQUIRE(id != nullptr);
  CHECK(id->value == 0.0);
}

TEST_CASE("small-field slope at half charge") {
  const auto r = small_beta_check(0.5, {0.01, 0.02, 0.05}, coarse(), {}, 3);
  const Check* s = find(r, "weak_field_slope");
  REQUIRE(s != nullptr);
  CHECK(s->value == doctest::Approx(-0.5).epsilon(0.04));
  CHECK(s->pass);
}

TEST_CASE("strong-field table has the expected columns") {
  const auto r = large_beta_check(1.0, {1e2, 1e3, 1e4}, 3);
  REQUIRE(r.points.size() == 3);
  for (const auto& p : r.points) {
    CHECK(p.get("L") == doctest::Approx(l_of_beta(p.parameter)).epsilon(1e-12));
    CHECK(p.get("E_HS") == doctest::Approx(hs_energy_exact(1.0).E).epsilon(1e-12));
    CHECK(p.get("gap") == doctest::Approx(p.get("E_conf_over_L2") - p.get("E_HS")).epsilon(1e-12));
  }
  const Check* b = find(r, "scaled_gap_bounded");
  REQUIRE(b != nullptr);
  CHECK(b->pass);
  CHECK(find(r, "fitted_C") != nullptr);
}

TEST_CASE("uniqueness from independent random starts") {
  MHParams p;
  p.lambda = 0.8;
  p.beta = 0.3;
  const auto r = uniqueness_probe(p, coarse(), {}, 11, 23);
  CHECK(r.passed());
}
