#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "slhyper/grid.hpp"
#include "slhyper/operator_model.hpp"
#include "slhyper/spectral.hpp"

namespace slhyper {

// Spectral solution of l_x f = l_y f with f(x, a) = h(x). Holds a pointer to
// the measure, which must outlive it.
struct CauchySolution {
  GridFunction h;
  std::vector<double> xs, ys;
  Eigen::MatrixXd f;             // xs x ys
  Eigen::MatrixXd pde_residual;  // l_x f - l_y f; NaN where the stencil leaves the domain
  double max_pde_residual = 0.0;
  std::optional<double> shifted_origin;

  const SpectralMeasure* sm = nullptr;
  Eigen::VectorXd coef;                        // (F h)(lambda_k) * mass_k
  std::shared_ptr<const KernelTable> shifted;  // w_{lambda_k, m} on a mesh from a_m

  Eigen::MatrixXd eval_grid(const std::vector<double>& x, const std::vector<double>& y) const;
  double eval(double x, double y) const;
};

CauchySolution solve_cauchy(const GridFunction& h, const SpectralMeasure& sm, const std::vector<double>& xs,
                            const std::vector<double>& ys);
CauchySolution solve_cauchy_shifted(const GridFunction& h, double a_m, const SpectralMeasure& sm,
                                    const std::vector<double>& xs, const std::vector<double>& ys);

// All coordinates are anchored standard coordinates.
struct TriangleIdentityReport {
  double c = 0.0, x = 0.0, y = 0.0;
  int n = 0;
  double H = 0.0, I0 = 0.0, I1 = 0.0, I2 = 0.0, I3 = 0.0, I4 = 0.0;
  double lhs = 0.0, rhs = 0.0, residual = 0.0;
};

// Generic form for any C^2 function u(xi, zeta) in standard coordinates; u is
// requested on the lattice (xi_i, zeta_j) = (x - y + c + i d, c + j d),
// i = -2 .. 2n + 2, j = -2 .. n + 2 with d = (y - c) / n.
TriangleIdentityReport triangle_identity(const MpCertificate& cert, double c, double x, double y, int n,
                                         const std::function<Eigen::MatrixXd(const std::vector<double>& xi,
                                                                             const std::vector<double>& zeta)>& u);

TriangleIdentityReport triangle_identity_residual(const CauchySolution& sol, const MpCertificate& cert, double c,
                                                  double x, double y, int n = 64);

struct PositivityReport {
  double min_value = 0.0;
  double max_value = 0.0;
  double strict_positive_fraction = 0.0;
  bool strict_checked = false;
};

// strict: also count grid points with f > 1e-10 (meaningful for degenerate operators).
PositivityReport positivity_report(const CauchySolution& sol, bool strict);

}  // namespace slhyper
