#include "bosatom/elliptic.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bosatom {

double agm(double a, double b) {
  if (a == b) return a;
  if (a == 0.0 || b == 0.0) return 0.0;
  for (int it = 0; it < 64; ++it) {
    const double an = 0.5 * (a + b);
    const double bn = std::sqrt(a * b);
    a = an;
    b = bn;
    if (std::abs(a - b) <= 1e-12 * a) break;
  }
  return 0.5 * (a + b);
}

double ellint_k(double k) {
  const double kp = std::sqrt((1.0 - k) * (1.0 + k));
  if (kp == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * std::numbers::pi / agm(1.0, kp);
}

double azimuthal_kernel(double r, double rp, double dz) {
  const double plus = std::hypot(r + rp, dz);
  const double minus = std::hypot(r - rp, dz);
  const double m = agm(plus, minus);
  return m > 0.0 ? 1.0 / m : std::numeric_limits<double>::infinity();
}

}  // namespace bosatom
