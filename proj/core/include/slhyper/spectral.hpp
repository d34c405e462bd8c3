#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "slhyper/grid.hpp"
#include "slhyper/kernel.hpp"

namespace slhyper {

struct SpectralOptions {
  double lambda_max = 0.0;  // 0: use the resolution cap (pi N / (2 L_gamma))^2
  double sigma2 = std::numeric_limits<double>::quiet_NaN();  // NaN: estimate from the standard form
  bool with_w1 = false;     // also tabulate quasi-derivatives
};

// Atomic approximation of the spectral measure from the eigenproblem on
// [a, L] with a Dirichlet condition at L.
class SpectralMeasure {
 public:
  std::string kind = "atoms";
  double L = 0.0;
  int N = 0;
  double sigma2 = 0.0;
  double lambda_cap = 0.0;
  Eigen::VectorXd lambda, mass;
  Eigen::VectorXd integral_w;            // int_a^L w_k r
  std::vector<std::size_t> near_bottom;  // atoms within 0.05 of sigma^2
  std::shared_ptr<const Kernel> kernel;
  KernelTable table;                     // w_k at the mesh nodes
  Eigen::VectorXd qw;                    // quadrature weights times r at the nodes

  std::size_t size() const { return static_cast<std::size_t>(lambda.size()); }
  const PanelMesh& mesh() const { return *table.mesh; }
  double start() const { return table.mesh->start; }

  // w_k(x) for every atom; x in [a, L].
  Eigen::VectorXd w_at(double x) const;
  Eigen::VectorXd w1_at(double x) const;
  // rho[sigma^2, Lambda]: piecewise linear across atom cells in sqrt(lambda - sigma^2).
  double cumulative(double Lambda) const;
  // Raw step-function value.
  double cumulative_step(double Lambda) const;
};

SpectralMeasure build_spectral_measure(std::shared_ptr<const Kernel> kernel, double L, int N,
                                       const SpectralOptions& opts = {});

struct TransformTable {
  std::vector<double> lambdas;
  Eigen::VectorXd values;
  double source_norm = 0.0;
};

// Values of h at the measure's mesh nodes (zero outside the grid of h).
Eigen::VectorXd sample_on_mesh(const GridFunction& h, const SpectralMeasure& sm);

TransformTable forward_transform(const GridFunction& h, const SpectralMeasure& sm);
GridFunction inverse_transform(const TransformTable& tbl, const SpectralMeasure& sm, const std::vector<double>& out_grid);
// Transform at arbitrary (complex) lambda by direct integration over the support of h.
std::vector<cplx> transform_at(const GridFunction& h, const Kernel& k, const std::vector<cplx>& lambdas);

double heat_kernel(double t, double x, double y, const SpectralMeasure& sm);
Eigen::MatrixXd heat_kernel_grid(double t, const std::vector<double>& xs, const std::vector<double>& ys,
                                 const SpectralMeasure& sm);
// e^{-t lambda_k} above the 1e-16 cutoff (zero beyond it).
Eigen::VectorXd heat_factors(double t, const SpectralMeasure& sm);

}  // namespace slhyper
