#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bosatom {

/// Thrown when an input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Axisymmetric (r, z) tensor grid with uniform spacing.
///
/// Nodes run over r = 0, h_r, ..., R_max and z = -Z_max, ..., Z_max with z = 0
/// at the centre index. Each node owns a cylindrical cell; the r = 0 node owns
/// the disc of radius h_r/2 and the outermost nodes own half cells, so the
/// weights sum exactly to the cylinder volume. Storage is row-major with z
/// contiguous: index(i, j) = i * n_z + j.
class Grid2D {
public:
  Grid2D(double r_max, double z_max, int n_r, int n_z);

  int n_r() const { return n_r_; }
  int n_z() const { return n_z_; }
  std::size_t size() const { return static_cast<std::size_t>(n_r_) * n_z_; }
  double r_max() const { return r_max_; }
  double z_max() const { return z_max_; }
  double h_r() const { return h_r_; }
  double h_z() const { return h_z_; }
  int z_center() const { return n_z_ / 2; }

  double r(int i) const { return r_nodes_[i]; }
  double z(int j) const { return z_nodes_[j]; }
  std::span<const double> r_nodes() const { return r_nodes_; }
  std::span<const double> z_nodes() const { return z_nodes_; }

  /// Annulus area owned by radial node i.
  double ring_area(int i) const { return ring_area_[i]; }
  /// z-extent owned by axial node j.
  double z_length(int j) const { return z_length_[j]; }
  /// Radius of the cell face between radial nodes i and i+1.
  double r_face(int i) const { return 0.5 * (r_nodes_[i] + r_nodes_[i + 1]); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * n_z_ + j;
  }
  double weight(int i, int j) const { return weights_[index(i, j)]; }
  std::span<const double> weights() const { return weights_; }

  /// Nodes pinned to zero by the outer Dirichlet condition.
  bool is_boundary(int i, int j) const {
    return i == n_r_ - 1 || j == 0 || j == n_z_ - 1;
  }

  /// Stable 64-bit fingerprint of the grid geometry (cache key).
  std::uint64_t fingerprint() const;

  /// Grid with every length multiplied by `factor` (same node counts).
  Grid2D scaled(double factor) const;

  bool operator==(const Grid2D& other) const;

private:
  double r_max_, z_max_;
  int n_r_, n_z_;
  double h_r_, h_z_;
  std::vector<double> r_nodes_, z_nodes_;
  std::vector<double> ring_area_, z_length_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid2D>;

GridPtr build_grid(double r_max, double z_max, int n_r, int n_z);

/// Nonnegative particle density sampled on a grid.
struct Density2D {
  GridPtr grid;
  std::vector<double> values;

  Density2D() = default;
  explicit Density2D(GridPtr g);
  Density2D(GridPtr g, std::vector<double> v);

  /// Throws InvalidArgument on size mismatch, negative or non-finite entries.
  void validate() const;
};

/// Real amplitude psi = sqrt(rho).
struct Wave2D {
  GridPtr grid;
  std::vector<double> values;

  Wave2D() = default;
  explicit Wave2D(GridPtr g);
  Wave2D(GridPtr g, std::vector<double> v);

  static Wave2D from_density(const Density2D& rho);
  Density2D density() const;
};

double mass(const Density2D& rho);

/// int |grad psi|^2 over the grid (finite-volume centred differences).
/// Node values are used as given; the solver pins boundary nodes to zero.
double kinetic_energy(const Wave2D& psi);

/// int ((beta^2/4) r^2 - beta) rho.
double diamagnetic_term(const Density2D& rho, double beta);

/// int r^2 rho.
double radial_second_moment(const Density2D& rho);

/// int rho^3, used by the Sobolev bound.
double cubic_integral(const Density2D& rho);

/// Fraction of the mass carried by the two outermost node layers.
double boundary_mass_fraction(const Density2D& rho);

/// Sample f(r, z) on every grid node.
template <class F>
std::vector<double> sample(const Grid2D& g, F&& f) {
  std::vector<double> out(g.size());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_z(); ++j) out[g.index(i, j)] = f(g.r(i), g.z(j));
  return out;
}

}  // namespace bosatom
