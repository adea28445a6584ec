#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bosatom/grid.hpp"

namespace bosatom {

/// Cell average of 1/|x| over the cylinder r <= b, |z| <= c centred on the origin.
double origin_cell_inverse_distance(double b, double c);

/// Integral of ln sqrt(x^2 + y^2) over the rectangle [-a, a] x [-b, b].
double rectangle_log_integral(double a, double b);

/// Azimuthally averaged Coulomb kernel tabulated for every pair of radial nodes.
///
/// value(i, ip, dj) = K(r_i, r_ip, dj * h_z). The coincident entries
/// (i == ip, dj == 0) hold the average of the kernel over the source cell, so
/// the node-sum of weights * kernel * rho is a regularised quadrature of the
/// Coulomb convolution. Internally the kernel is stored as real spectra (the
/// kernel is even in dz) of length n_fft / 2 + 1 for each unordered pair.
class AziKernel {
public:
  explicit AziKernel(GridPtr grid);

  const Grid2D& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  double value(int i, int ip, int dj) const;
  double diagonal(int i) const { return diagonal_[i]; }

  /// phi = sum_{ip,jp} K(i, ip, j - jp) * q(ip, jp) through FFT along z.
  void convolve(std::span<const double> q, std::span<double> phi) const;
  /// Same sum by direct Toeplitz multiplication (O(n_r^2 n_z^2)).
  void convolve_direct(std::span<const double> q, std::span<double> phi) const;

  void save(const std::filesystem::path& path) const;
  /// Returns nullopt if the file is missing, unreadable, or built for another grid.
  static std::optional<AziKernel> load(const std::filesystem::path& path, GridPtr grid);

private:
  struct Uninitialized {};
  AziKernel(GridPtr grid, Uninitialized);
  std::size_t pair_index(int i, int ip) const;
  double spatial_value(int i, int ip, int dj) const;
  void build_spectra();

  GridPtr grid_;
  int n_fft_ = 0;
  int n_spec_ = 0;
  std::vector<double> diagonal_;
  std::vector<double> spectra_;
};

using KernelPtr = std::shared_ptr<const AziKernel>;

KernelPtr build_kernel(GridPtr grid);

/// Builds the kernel or reuses a cached copy from `cache_dir`
/// (defaults to $BOSATOM_CACHE_DIR when set; no caching otherwise).
KernelPtr load_or_build_kernel(GridPtr grid,
                               std::optional<std::filesystem::path> cache_dir = std::nullopt);

/// 1/|x| at each node; the origin node holds its cell average.
std::vector<double> nuclear_potential(const Grid2D& grid);

/// int rho / |x| with the nucleus at the origin.
double attraction_energy(const Density2D& rho);

/// Convolution part of the Hartree potential, rho * 1/|x|, on the grid nodes.
struct Potential2D {
  GridPtr grid;
  std::vector<double> values;
};

Potential2D hartree_potential(const Density2D& rho, const AziKernel& kernel);
Potential2D hartree_potential_direct(const Density2D& rho, const AziKernel& kernel);

/// D[rho, rho] = (1/2) int rho (rho * 1/|x|).
double direct_energy(const Density2D& rho, const AziKernel& kernel);

/// Largest value of (rho * 1/|x|) over on-axis nodes, the grid version of
/// sup_y int rho(x) / |x - y|.
double max_axis_potential(const Potential2D& phi);

}  // namespace bosatom
