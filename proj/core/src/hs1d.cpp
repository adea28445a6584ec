#include "bosatom/hs1d.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "bosatom/grid.hpp"
#include "csv.hpp"
#include "line_problem.hpp"

namespace bosatom {

void HSDensity::validate() const {
  const std::size_t n = z_nodes.size();
  if (n < 3 || n % 2 == 0) throw InvalidArgument("HS grid needs an odd number (>= 3) of nodes");
  if (values.size() != n) throw InvalidArgument("HS density size mismatch");
  if (z_nodes[n / 2] != 0.0) throw InvalidArgument("HS grid must contain z = 0 at its centre");
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (!(z_nodes[k + 1] > z_nodes[k])) throw InvalidArgument("HS grid must increase");
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(z_nodes[k] + z_nodes[n - 1 - k]) > 1e-12 * std::abs(z_nodes[k]))
      throw InvalidArgument("HS grid must be symmetric");
    if (!(values[k] >= 0.0) || !std::isfinite(values[k]))
      throw InvalidArgument("HS density must be nonnegative and finite");
  }
}

double HSDensity::mass() const {
  double m = 0.0;
  for (std::size_t k = 0; k + 1 < z_nodes.size(); ++k)
    m += 0.5 * (values[k] + values[k + 1]) * (z_nodes[k + 1] - z_nodes[k]);
  return m;
}

void HSParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw InvalidArgument("zeta must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be nonnegative");
}

double HSParams::critical_charge() const {
  return alpha > 0.0 ? 2.0 * zeta / alpha : std::numeric_limits<double>::infinity();
}

double hs_offset(double lambda) {
  if (!(lambda > 0.0 && lambda < 2.0)) throw InvalidArgument("offset needs 0 < lambda < 2");
  return std::atanh(0.5 * (2.0 - lambda));
}

double hs_exact_density(double lambda, double z) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  const double az = std::abs(z);
  if (lambda >= 2.0) return 2.0 / ((2.0 + az) * (2.0 + az));
  const double d = 2.0 - lambda;
  const double s = std::sinh(0.25 * d * az + hs_offset(lambda));
  const double amp = d / (4.0 * s);
  return 2.0 * amp * amp;
}

HSDensity hs_exact_profile(double lambda, const std::vector<double>& z_nodes) {
  HSDensity out{z_nodes, std::vector<double>(z_nodes.size())};
  for (std::size_t k = 0; k < z_nodes.size(); ++k) out.values[k] = hs_exact_density(lambda, z_nodes[k]);
  return out;
}

EnergyBreakdown hs_energy_exact(double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  const double lam = std::min(lambda, 2.0);
  boost::math::quadrature::exp_sinh<double> integrator;
  const double tol = 1e-14;
  EnergyBreakdown e;
  if (lam >= 2.0) {
    // psi = sqrt(2) / (2 + z)
    e.K = 2.0 * integrator.integrate([](double z) { return 2.0 / std::pow(2.0 + z, 4); }, 0.0,
                                     std::numeric_limits<double>::infinity(), tol);
    e.R = integrator.integrate([](double z) { return 4.0 / std::pow(2.0 + z, 4); }, 0.0,
                               std::numeric_limits<double>::infinity(), tol);
    e.A = hs_exact_density(2.0, 0.0);
  } else {
    // In x = kappa z + c: psi = sqrt(2) kappa / sinh x, dz = dx / kappa.
    const double kappa = 0.25 * (2.0 - lam);
    const double c = hs_offset(lam);
    auto from_c = [&](auto f) {
      return integrator.integrate([&](double y) { return f(c + y); }, 0.0,
                                  std::numeric_limits<double>::infinity(), tol);
    };
    const double amp = std::sqrt(2.0) * kappa;
    e.K = 2.0 * amp * amp * kappa * from_c([](double x) {
            if (x > 300.0) return 0.0;
            const double q = 1.0 / (std::tanh(x) * std::sinh(x));
            return q * q;
          });
    e.R = std::pow(amp, 4) / kappa * from_c([](double x) { return std::pow(std::sinh(x), -4); });
    e.A = hs_exact_density(lam, 0.0);
  }
  e.E = e.K - e.A + e.R;
  e.mu = (e.E + e.R) / lam;
  return e;
}

EnergyBreakdown hs_evaluate(const HSDensity& rho, double zeta, double alpha) {
  rho.validate();
  const auto& z = rho.z_nodes;
  const std::size_t n = z.size();
  EnergyBreakdown e;
  double m = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = z[k + 1] - z[k];
    const double d = std::sqrt(rho.values[k + 1]) - std::sqrt(rho.values[k]);
    e.K += d * d / h;
    const double w = 0.5 * h;
    e.R += 0.5 * alpha * w * (rho.values[k] * rho.values[k] + rho.values[k + 1] * rho.values[k + 1]);
    m += w * (rho.values[k] + rho.values[k + 1]);
  }
  e.A = zeta * rho.values[n / 2];
  e.E = e.K - e.A + e.R;
  e.mu = m > 0.0 ? (e.K - e.A + 2.0 * e.R) / m : 0.0;
  return e;
}

HSResult hs_minimize(const HSParams& params, const HSGridOptions& grid,
                     const HSSolverOptions& opts) {
  params.validate();
  detail::LineProblem p;
  p.nodes = detail::graded_half_nodes(grid.h0, grid.ratio, grid.h_max, grid.z_max);
  p.set_lumped_weights();
  p.set_kinetic(1.0);
  p.attraction = Eigen::VectorXd::Zero(p.size());
  p.attraction[0] = params.zeta;
  p.contact = params.alpha * p.weight;

  HSResult out;
  out.bound_charge = std::min(params.lambda, params.critical_charge());
  out.clamped = params.lambda > out.bound_charge;
  detail::LineOptions lo;
  lo.tol = opts.tol;
  lo.max_iter = opts.max_iter;
  const detail::LineState st = detail::line_minimize(p, out.bound_charge, lo);

  const int n = p.size();
  const std::size_t full = 2 * p.nodes.size() - 1;
  out.density.z_nodes.resize(full);
  out.density.values.assign(full, 0.0);
  const std::size_t mid = p.nodes.size() - 1;
  for (std::size_t k = 0; k < p.nodes.size(); ++k) {
    const double v = static_cast<int>(k) < n ? st.psi[k] * st.psi[k] : 0.0;
    out.density.z_nodes[mid + k] = p.nodes[k];
    out.density.z_nodes[mid - k] = -p.nodes[k];
    out.density.values[mid + k] = out.density.values[mid - k] = v;
  }
  out.energy = st.energy;
  out.residual = st.residual;
  out.iterations = st.iterations;
  return out;
}

HSResidual hs_linear_residual(const HSDensity& rho, double lambda) {
  rho.validate();
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  const auto& z = rho.z_nodes;
  const std::size_t n = z.size(), mid = n / 2;
  std::vector<double> psi(n);
  for (std::size_t k = 0; k < n; ++k) psi[k] = std::sqrt(rho.values[k]);
  if (!(psi[mid] > 0.0)) throw InvalidArgument("density must be positive at z = 0");

  // Interior stencil; the nodes next to the origin use one-sided neighbours only.
  std::vector<double> h_psi(n, 0.0), w(n, 0.0);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (k == mid) continue;
    const double hl = z[k] - z[k - 1], hr = z[k + 1] - z[k];
    const double lap = 2.0 * ((psi[k + 1] - psi[k]) / hr - (psi[k] - psi[k - 1]) / hl) / (hl + hr);
    h_psi[k] = -lap + rho.values[k] * psi[k];
    w[k] = 0.5 * (hl + hr);
    num += w[k] * psi[k] * h_psi[k];
    den += w[k] * psi[k] * psi[k];
  }
  HSResidual out;
  out.mu = num / den;
  double res = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (k == mid) continue;
    const double r = h_psi[k] - out.mu * psi[k];
    res += w[k] * r * r;
  }
  out.interior = std::sqrt(res / den);

  auto one_sided = [&](int dir) {
    // second-order derivative at 0 from nodes 0, x1, x2 on one side
    const double x1 = z[mid + dir] - z[mid], x2 = z[mid + 2 * dir] - z[mid];
    return -(x1 + x2) / (x1 * x2) * psi[mid] + x2 / (x1 * (x2 - x1)) * psi[mid + dir] -
           x1 / (x2 * (x2 - x1)) * psi[mid + 2 * dir];
  };
  out.jump_defect = (one_sided(1) - one_sided(-1) + psi[mid]) / psi[mid];
  out.residual = std::hypot(out.interior, out.jump_defect);
  const EnergyBreakdown e = hs_evaluate(rho);
  out.mu_identity = (e.E + e.R) / lambda;
  return out;
}

void write_hs_profile_csv(std::ostream& os, const HSDensity& exact, const HSDensity& numeric) {
  if (exact.z_nodes != numeric.z_nodes) throw InvalidArgument("profiles use different grids");
  detail::CsvWriter csv(os, {"z", "rho_exact", "rho_numeric"});
  for (std::size_t k = 0; k < exact.z_nodes.size(); ++k)
    csv.row({exact.z_nodes[k], exact.values[k], numeric.values[k]});
}

void write_hs_energy_csv(std::ostream& os, const std::vector<HSEnergyRow>& rows) {
  detail::CsvWriter csv(os, {"lambda", "E_exact", "E_numeric", "K", "A", "R", "mu"});
  for (const auto& r : rows)
    csv.row({r.lambda, r.exact, r.numeric.E, r.numeric.K, r.numeric.A, r.numeric.R, r.numeric.mu});
}

}  // namespace bosatom
