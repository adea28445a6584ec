#pragma once

#include <stdexcept>
#include <string>

namespace bosatom {

/// Energy contributions with E = K - A + R.
///
/// K is the kinetic energy (in 2-D including the (beta^2/4) r^2 - beta terms),
/// A the nuclear attraction, R the self-repulsion, and mu the Rayleigh quotient
/// of the mean-field operator (the chemical potential at a minimizer).
struct EnergyBreakdown {
  double K = 0.0;
  double A = 0.0;
  double R = 0.0;
  double E = 0.0;
  double mu = 0.0;
};

/// Solver failure carrying the last residual.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

private:
  double residual_;
  int iterations_;
};

class ConvergenceError : public SolverError {
public:
  using SolverError::SolverError;
};

class InstabilityError : public SolverError {
public:
  using SolverError::SolverError;
};

}  // namespace bosatom
