#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "slhyper/errors.hpp"
#include "slhyper/grid.hpp"
#include "slhyper/kernel.hpp"
#include "slhyper/spectral.hpp"

namespace slhyper {

// Pi_kappa = {lambda : |Im sqrt(lambda - sigma^2)| <= Im sqrt(kappa - sigma^2)}.
class SpectralStrip {
 public:
  SpectralStrip(double kappa, double sigma2);
  double kappa() const { return kappa_; }
  double sigma2() const { return sigma2_; }
  double half_width() const { return width_; }  // Im Delta_kappa
  bool contains(cplx lambda, double tol = 1e-12) const;
  // (tau + i Im Delta_kappa)^2 + sigma^2
  cplx boundary(double tau) const;

 private:
  double kappa_, sigma2_, width_;
};

// Principal branch of sqrt(lambda - sigma^2).
cplx delta(cplx lambda, double sigma2);

// int |h| w_kappa r over the grid of h; throws when the integrand does not decay
// toward the end of the grid (numerically divergent).
double l1_kappa_norm(const GridFunction& h, double kappa, const Kernel& k, double sigma2);

struct WienerLevyReport {
  bool ok = false;
  double min_modulus = 0.0;
  cplx witness{0.0, 0.0};         // lambda at the minimum (a refined zero when one was bracketed)
  double witness_modulus = 0.0;
  bool zero_bracketed = false;
  double tail_bound = 0.0;        // max |Ff| over the outer tenth of the samples
  double norm_bound = 0.0;        // ||f||_{1,kappa}, bounds |Ff| on the whole strip
  bool tail_is_surrogate = true;  // false when norm_bound < |rho| settles lambda = infinity
  int samples = 0;
};

// Thrown when rho + Ff has a (numerical) zero on the strip; carries the witness.
class NotSolvableError : public DomainError {
 public:
  NotSolvableError(const std::string& msg, WienerLevyReport rep) : DomainError(msg), report_(rep) {}
  const WienerLevyReport& report() const { return report_; }

 private:
  WienerLevyReport report_;
};

WienerLevyReport wiener_levy_check(const GridFunction& f, const SpectralStrip& strip, cplx rho,
                                   const SpectralMeasure& sm, int n_samples = 512);

struct ResolventKernel {
  GridFunction g;
  Eigen::VectorXd Fg;          // on the atoms
  double roundtrip = 0.0;      // max |(rho + Ff)(1/rho + Fg) - 1| on the atoms
  double recheck = 0.0;        // max |F(g) - Fg| / max |Fg| after resampling g
};

// Fg = 1/(rho + Ff) - 1/rho on the atoms; g is its inverse transform on out_grid.
ResolventKernel resolvent_kernel(const GridFunction& f, double rho, const SpectralMeasure& sm,
                                 const std::vector<double>& out_grid, double kappa);

// rho h + h * f = psi
struct EquationProblem {
  GridFunction f;
  GridFunction psi;
  double kappa = 0.0;
  cplx rho{1.0, 0.0};
};

struct EquationSolution {
  GridFunction h;
  GridFunction g;
  WienerLevyReport check;
  double transform_residual = 0.0;  // max |Fh (rho + Ff) - F psi| / max |F psi| on the atoms
};

EquationSolution solve_equation(const EquationProblem& prob, const SpectralMeasure& sm);

// p(t, x, .) sampled on grid.
GridFunction heat_kernel_slice(double t, double x, const SpectralMeasure& sm, const std::vector<double>& grid);

EquationSolution solve_qt_equation(double t, double x, const GridFunction& psi, const SpectralMeasure& sm);

}  // namespace slhyper
