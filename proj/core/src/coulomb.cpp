#include "bosatom/coulomb.hpp"

#include <fftw3.h>
#include <mutex>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bosatom/elliptic.hpp"

namespace bosatom {

namespace {

constexpr double pi = std::numbers::pi;
constexpr char kMagic[8] = {'B', 'O', 'S', 'K', 'E', 'R', 'N', '1'};

// Cell average of the ring kernel around a node at radius r > 0. The kernel
// behaves like -(1/(pi r')) ln|x - x'| near coincidence; the log is integrated
// exactly and the bounded remainder by Gauss-Legendre on the four quadrants.
double ring_cell_average(double r, double hr, double hz) {
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  const double a = 0.5 * hr, b = 0.5 * hz;
  auto remainder = [r](double rp, double zp) {
    const double minus = std::hypot(r - rp, zp);
    return azimuthal_kernel(r, rp, zp) * 2.0 * pi * rp + 2.0 * std::log(minus);
  };
  double smooth = 0.0;
  for (double side : {-1.0, 1.0}) {
    smooth += Gauss::integrate(
        [&](double u) {
          const double rp = r + side * u;
          return Gauss::integrate([&](double zp) { return remainder(rp, zp); }, 0.0, b);
        },
        0.0, a);
  }
  smooth *= 2.0;  // z' < 0 half
  const double total = smooth - 2.0 * rectangle_log_integral(a, b);
  return total / (2.0 * pi * r * hr * hz);
}

// The FFTW planner is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  explicit FftPlans(int n) {
    std::lock_guard lock(planner_mutex());
    std::vector<double> re(n);
    std::vector<fftw_complex> sp(n / 2 + 1);
    forward = fftw_plan_dft_r2c_1d(n, re.data(), sp.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward = fftw_plan_dft_c2r_1d(n, sp.data(), re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
};

}  // namespace

double origin_cell_inverse_distance(double b, double c) {
  const double integral = 2.0 * pi * (c * std::hypot(b, c) + b * b * std::asinh(c / b) - c * c);
  return integral / (pi * b * b * 2.0 * c);
}

double rectangle_log_integral(double a, double b) {
  // int_0^a int_0^b ln(x^2 + y^2) = ab(ln(a^2+b^2) - 3) + a^2 atan(b/a) + b^2 atan(a/b)
  const double quarter = a * b * (std::log(a * a + b * b) - 3.0) + a * a * std::atan(b / a) +
                         b * b * std::atan(a / b);
  return 2.0 * quarter;
}

AziKernel::AziKernel(GridPtr grid, Uninitialized) : grid_(std::move(grid)) {
  n_fft_ = 2 * grid_->n_z();
  n_spec_ = n_fft_ / 2 + 1;
}

AziKernel::AziKernel(GridPtr grid) : AziKernel(std::move(grid), Uninitialized{}) {
  const Grid2D& g = *grid_;
  diagonal_.resize(g.n_r());
  diagonal_[0] = origin_cell_inverse_distance(0.5 * g.h_r(), 0.5 * g.h_z());
  for (int i = 1; i < g.n_r(); ++i) diagonal_[i] = ring_cell_average(g.r(i), g.h_r(), g.h_z());
  build_spectra();
}

std::size_t AziKernel::pair_index(int i, int ip) const {
  if (i > ip) std::swap(i, ip);
  return static_cast<std::size_t>(ip) * (ip + 1) / 2 + i;
}

double AziKernel::spatial_value(int i, int ip, int dj) const {
  if (i == ip && dj == 0) return diagonal_[i];
  const Grid2D& g = *grid_;
  return azimuthal_kernel(g.r(i), g.r(ip), dj * g.h_z());
}

double AziKernel::value(int i, int ip, int dj) const { return spatial_value(i, ip, dj); }

void AziKernel::build_spectra() {
  const Grid2D& g = *grid_;
  const int nr = g.n_r(), nz = g.n_z();
  const std::size_t n_pairs = static_cast<std::size_t>(nr) * (nr + 1) / 2;
  spectra_.assign(n_pairs * n_spec_, 0.0);
  FftPlans plans(n_fft_);
  std::vector<double> seq(n_fft_);
  std::vector<fftw_complex> sp(n_spec_);
  for (int ip = 0; ip < nr; ++ip) {
    for (int i = 0; i <= ip; ++i) {
      std::fill(seq.begin(), seq.end(), 0.0);
      for (int m = 0; m < nz; ++m) {
        const double v = spatial_value(i, ip, m);
        seq[m] = v;
        if (m > 0) seq[n_fft_ - m] = v;
      }
      fftw_execute_dft_r2c(plans.forward, seq.data(), sp.data());
      double* dst = spectra_.data() + pair_index(i, ip) * n_spec_;
      for (int k = 0; k < n_spec_; ++k) dst[k] = sp[k][0];
    }
  }
}

void AziKernel::convolve(std::span<const double> q, std::span<double> phi) const {
  const Grid2D& g = *grid_;
  const int nr = g.n_r(), nz = g.n_z();
  FftPlans plans(n_fft_);
  std::vector<double> re(static_cast<std::size_t>(nr) * n_spec_);
  std::vector<double> im(static_cast<std::size_t>(nr) * n_spec_);
  std::vector<double> seq(n_fft_, 0.0);
  std::vector<fftw_complex> sp(n_spec_);
  std::vector<char> active(nr, 0);
  for (int ip = 0; ip < nr; ++ip) {
    std::fill(seq.begin(), seq.end(), 0.0);
    bool any = false;
    for (int j = 0; j < nz; ++j) {
      seq[j] = q[g.index(ip, j)];
      any = any || seq[j] != 0.0;
    }
    active[ip] = any;
    if (!any) continue;
    fftw_execute_dft_r2c(plans.forward, seq.data(), sp.data());
    for (int k = 0; k < n_spec_; ++k) {
      re[ip * n_spec_ + k] = sp[k][0];
      im[ip * n_spec_ + k] = sp[k][1];
    }
  }
  std::vector<double> acc_re(n_spec_), acc_im(n_spec_);
  const double scale = 1.0 / n_fft_;
  for (int i = 0; i < nr; ++i) {
    std::fill(acc_re.begin(), acc_re.end(), 0.0);
    std::fill(acc_im.begin(), acc_im.end(), 0.0);
    for (int ip = 0; ip < nr; ++ip) {
      if (!active[ip]) continue;
      const double* kern = spectra_.data() + pair_index(i, ip) * n_spec_;
      const double* qr = re.data() + ip * n_spec_;
      const double* qi = im.data() + ip * n_spec_;
      for (int k = 0; k < n_spec_; ++k) {
        acc_re[k] += kern[k] * qr[k];
        acc_im[k] += kern[k] * qi[k];
      }
    }
    for (int k = 0; k < n_spec_; ++k) {
      sp[k][0] = acc_re[k];
      sp[k][1] = acc_im[k];
    }
    fftw_execute_dft_c2r(plans.backward, sp.data(), seq.data());
    for (int j = 0; j < nz; ++j) phi[g.index(i, j)] = seq[j] * scale;
  }
}

void AziKernel::convolve_direct(std::span<const double> q, std::span<double> phi) const {
  const Grid2D& g = *grid_;
  const int nr = g.n_r(), nz = g.n_z();
  std::fill(phi.begin(), phi.end(), 0.0);
  std::vector<double> row(2 * nz - 1);
  for (int i = 0; i < nr; ++i) {
    for (int ip = 0; ip < nr; ++ip) {
      for (int d = -(nz - 1); d <= nz - 1; ++d) row[d + nz - 1] = spatial_value(i, ip, d);
      for (int j = 0; j < nz; ++j) {
        double s = 0.0;
        for (int jp = 0; jp < nz; ++jp) s += row[j - jp + nz - 1] * q[g.index(ip, jp)];
        phi[g.index(i, j)] += s;
      }
    }
  }
}

void AziKernel::save(const std::filesystem::path& path) const {
  std::ostringstream suffix;
  suffix << ".tmp" << std::hex << std::hash<std::thread::id>{}(std::this_thread::get_id()) << reinterpret_cast<std::uintptr_t>(this);
  const std::filesystem::path tmp = path.string() + suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;
    const std::uint64_t fp = grid_->fingerprint();
    const std::int64_t header[4] = {grid_->n_r(), grid_->n_z(), n_fft_,
                                    static_cast<std::int64_t>(spectra_.size())};
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&fp), sizeof fp);
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    out.write(reinterpret_cast<const char*>(diagonal_.data()),
              static_cast<std::streamsize>(diagonal_.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(spectra_.data()),
              static_cast<std::streamsize>(spectra_.size() * sizeof(double)));
    if (!out) return;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

std::optional<AziKernel> AziKernel::load(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint64_t fp = 0;
  std::int64_t header[4];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&fp), sizeof fp);
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) return std::nullopt;
  AziKernel k(std::move(grid), Uninitialized{});
  const Grid2D& g = k.grid();
  const std::size_t expected =
      static_cast<std::size_t>(g.n_r()) * (g.n_r() + 1) / 2 * static_cast<std::size_t>(k.n_spec_);
  if (fp != g.fingerprint() || header[0] != g.n_r() || header[1] != g.n_z() ||
      header[2] != k.n_fft_ || header[3] != static_cast<std::int64_t>(expected))
    return std::nullopt;
  k.diagonal_.resize(g.n_r());
  k.spectra_.resize(expected);
  in.read(reinterpret_cast<char*>(k.diagonal_.data()),
          static_cast<std::streamsize>(k.diagonal_.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(k.spectra_.data()),
          static_cast<std::streamsize>(k.spectra_.size() * sizeof(double)));
  if (!in) return std::nullopt;
  return k;
}

KernelPtr build_kernel(GridPtr grid) { return std::make_shared<const AziKernel>(std::move(grid)); }

KernelPtr load_or_build_kernel(GridPtr grid, std::optional<std::filesystem::path> cache_dir) {
  if (!cache_dir) {
    if (const char* env = std::getenv("BOSATOM_CACHE_DIR"); env && *env) cache_dir = env;
  }
  if (!cache_dir) return build_kernel(std::move(grid));
  std::ostringstream name;
  name << "kernel-" << std::hex << grid->fingerprint() << ".bin";
  const auto path = *cache_dir / name.str();
  if (auto cached = AziKernel::load(path, grid)) return std::make_shared<const AziKernel>(std::move(*cached));
  auto built = build_kernel(std::move(grid));
  std::error_code ec;
  std::filesystem::create_directories(*cache_dir, ec);
  if (!ec) built->save(path);
  return built;
}

std::vector<double> nuclear_potential(const Grid2D& g) {
  std::vector<double> v(g.size());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_z(); ++j) v[g.index(i, j)] = 1.0 / std::hypot(g.r(i), g.z(j));
  v[g.index(0, g.z_center())] = origin_cell_inverse_distance(0.5 * g.h_r(), 0.5 * g.h_z());
  return v;
}

double attraction_energy(const Density2D& rho) {
  const Grid2D& g = *rho.grid;
  const auto v = nuclear_potential(g);
  const auto w = g.weights();
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += w[k] * v[k] * rho.values[k];
  return s;
}

namespace {

std::vector<double> weighted(const Density2D& rho) {
  const auto w = rho.grid->weights();
  std::vector<double> q(w.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = w[k] * rho.values[k];
  return q;
}

void require_same_grid(const Density2D& rho, const AziKernel& kernel) {
  if (!(*rho.grid == kernel.grid()))
    throw InvalidArgument("kernel was built for a different grid");
}

}  // namespace

Potential2D hartree_potential(const Density2D& rho, const AziKernel& kernel) {
  require_same_grid(rho, kernel);
  Potential2D phi{rho.grid, std::vector<double>(rho.grid->size())};
  kernel.convolve(weighted(rho), phi.values);
  return phi;
}

Potential2D hartree_potential_direct(const Density2D& rho, const AziKernel& kernel) {
  require_same_grid(rho, kernel);
  Potential2D phi{rho.grid, std::vector<double>(rho.grid->size())};
  kernel.convolve_direct(weighted(rho), phi.values);
  return phi;
}

double direct_energy(const Density2D& rho, const AziKernel& kernel) {
  const auto phi = hartree_potential(rho, kernel);
  const auto w = rho.grid->weights();
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * rho.values[k] * phi.values[k];
  return 0.5 * s;
}

double max_axis_potential(const Potential2D& phi) {
  const Grid2D& g = *phi.grid;
  double m = 0.0;
  for (int j = 0; j < g.n_z(); ++j) m = std::max(m, phi.values[g.index(0, j)]);
  return m;
}

}  // namespace bosatom
