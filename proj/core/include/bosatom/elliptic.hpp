#pragma once

namespace bosatom {

/// Arithmetic-geometric mean of a, b >= 0, iterated to relative tolerance 1e-12.
double agm(double a, double b);

/// Complete elliptic integral of the first kind, K(k) = pi / (2 agm(1, sqrt(1-k^2))).
/// Takes the modulus k (not the parameter m = k^2); requires 0 <= k < 1.
double ellint_k(double k);

/// Azimuthal average (1/2pi) int dphi / sqrt(r^2 + r'^2 - 2 r r' cos phi + dz^2).
///
/// Equal to (2/pi) K(k) / sqrt((r+r')^2 + dz^2) with k^2 = 4 r r' / ((r+r')^2 + dz^2),
/// which by homogeneity of the AGM collapses to 1 / agm(rho_plus, rho_minus).
/// Diverges at coincidence (r = r', dz = 0).
double azimuthal_kernel(double r, double rp, double dz);

}  // namespace bosatom
