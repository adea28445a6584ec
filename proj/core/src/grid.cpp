#include "bosatom/grid.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace bosatom {

namespace {

constexpr double pi = std::numbers::pi;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // FNV-1a over the 8 bytes of v
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

Grid2D::Grid2D(double r_max, double z_max, int n_r, int n_z)
    : r_max_(r_max), z_max_(z_max), n_r_(n_r), n_z_(n_z) {
  if (!(r_max > 0.0) || !(z_max > 0.0) || !std::isfinite(r_max) ||
      !std::isfinite(z_max))
    throw InvalidArgument("grid extents must be positive and finite");
  if (n_r < 8 || n_z < 8)
    throw InvalidArgument("grid needs at least 8 nodes per direction");
  if (n_z % 2 == 0)
    throw InvalidArgument("n_z must be odd so that z = 0 is a node");

  h_r_ = r_max / (n_r - 1);
  h_z_ = 2.0 * z_max / (n_z - 1);

  r_nodes_.resize(n_r);
  for (int i = 0; i < n_r; ++i) r_nodes_[i] = i * h_r_;
  r_nodes_.back() = r_max;

  // Built from the centre outwards so the node set is exactly antisymmetric.
  z_nodes_.resize(n_z);
  const int c = n_z / 2;
  z_nodes_[c] = 0.0;
  for (int k = 1; k <= c; ++k) {
    const double zk = (k == c) ? z_max : k * h_z_;
    z_nodes_[c + k] = zk;
    z_nodes_[c - k] = -zk;
  }

  ring_area_.resize(n_r);
  ring_area_[0] = pi * 0.25 * h_r_ * h_r_;
  for (int i = 1; i < n_r - 1; ++i) ring_area_[i] = 2.0 * pi * r_nodes_[i] * h_r_;
  const double inner = r_max - 0.5 * h_r_;
  ring_area_[n_r - 1] = pi * (r_max * r_max - inner * inner);

  z_length_.assign(n_z, h_z_);
  z_length_.front() = z_length_.back() = 0.5 * h_z_;

  weights_.resize(size());
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_z; ++j) weights_[index(i, j)] = ring_area_[i] * z_length_[j];
}

std::uint64_t Grid2D::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = mix(h, std::bit_cast<std::uint64_t>(r_max_));
  h = mix(h, std::bit_cast<std::uint64_t>(z_max_));
  h = mix(h, static_cast<std::uint64_t>(n_r_));
  h = mix(h, static_cast<std::uint64_t>(n_z_));
  return h;
}

Grid2D Grid2D::scaled(double factor) const {
  return Grid2D(r_max_ * factor, z_max_ * factor, n_r_, n_z_);
}

bool Grid2D::operator==(const Grid2D& other) const {
  return r_max_ == other.r_max_ && z_max_ == other.z_max_ && n_r_ == other.n_r_ &&
         n_z_ == other.n_z_;
}

GridPtr build_grid(double r_max, double z_max, int n_r, int n_z) {
  return std::make_shared<const Grid2D>(r_max, z_max, n_r, n_z);
}

Density2D::Density2D(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}

Density2D::Density2D(GridPtr g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  validate();
}

void Density2D::validate() const {
  if (!grid) throw InvalidArgument("density has no grid");
  if (values.size() != grid->size())
    throw InvalidArgument("density size does not match grid");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("density must be finite and nonnegative");
}

Wave2D::Wave2D(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}

Wave2D::Wave2D(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid->size()) throw InvalidArgument("wave size does not match grid");
}

Wave2D Wave2D::from_density(const Density2D& rho) {
  std::vector<double> v(rho.values.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::sqrt(rho.values[k]);
  return Wave2D(rho.grid, std::move(v));
}

Density2D Wave2D::density() const {
  std::vector<double> v(values.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = values[k] * values[k];
  return Density2D(grid, std::move(v));
}

double mass(const Density2D& rho) {
  const auto w = rho.grid->weights();
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * rho.values[k];
  return s;
}

double kinetic_energy(const Wave2D& psi) {
  const Grid2D& g = *psi.grid;
  const auto& p = psi.values;
  double s = 0.0;
  const double inv_hr = 1.0 / g.h_r(), inv_hz = 1.0 / g.h_z();
  for (int i = 0; i + 1 < g.n_r(); ++i) {
    const double face = 2.0 * std::numbers::pi * g.r_face(i) * inv_hr;
    for (int j = 0; j < g.n_z(); ++j) {
      const double d = p[g.index(i + 1, j)] - p[g.index(i, j)];
      s += face * g.z_length(j) * d * d;
    }
  }
  for (int i = 0; i < g.n_r(); ++i) {
    const double a = g.ring_area(i) * inv_hz;
    for (int j = 0; j + 1 < g.n_z(); ++j) {
      const double d = p[g.index(i, j + 1)] - p[g.index(i, j)];
      s += a * d * d;
    }
  }
  return s;
}

double diamagnetic_term(const Density2D& rho, double beta) {
  if (beta == 0.0) return 0.0;
  const Grid2D& g = *rho.grid;
  double s = 0.0;
  for (int i = 0; i < g.n_r(); ++i) {
    const double v = 0.25 * beta * beta * g.r(i) * g.r(i) - beta;
    for (int j = 0; j < g.n_z(); ++j) s += g.weight(i, j) * v * rho.values[g.index(i, j)];
  }
  return s;
}

double radial_second_moment(const Density2D& rho) {
  const Grid2D& g = *rho.grid;
  double s = 0.0;
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_z(); ++j)
      s += g.weight(i, j) * g.r(i) * g.r(i) * rho.values[g.index(i, j)];
  return s;
}

double cubic_integral(const Density2D& rho) {
  const auto w = rho.grid->weights();
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double v = rho.values[k];
    s += w[k] * v * v * v;
  }
  return s;
}

double boundary_mass_fraction(const Density2D& rho) {
  const Grid2D& g = *rho.grid;
  double edge = 0.0, total = 0.0;
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_z(); ++j) {
      const double m = g.weight(i, j) * rho.values[g.index(i, j)];
      total += m;
      if (i >= g.n_r() - 2 || j <= 1 || j >= g.n_z() - 2) edge += m;
    }
  return total > 0.0 ? edge / total : 0.0;
}

}  // namespace bosatom
