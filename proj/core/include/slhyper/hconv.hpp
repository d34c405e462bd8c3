#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slhyper/grid.hpp"
#include "slhyper/operator_model.hpp"
#include "slhyper/spectral.hpp"

namespace slhyper {

// Time-shifted product kernel q_t(x, y, .) sampled on a grid.
struct ProductKernel {
  double t = 0.0, x = 0.0, y = 0.0;
  std::vector<double> xi;
  Eigen::VectorXd q;
  double mass = 0.0;           // integral of q r over [a, L]
  bool mass_warning = false;   // |mass - 1| > 1e-2
  double min_value() const { return q.size() ? q.minCoeff() : 0.0; }
};

// Spectral coefficients e^{-t lambda_k} m_k w_k(x) w_k(y) (zero past the cutoff).
Eigen::VectorXd product_coefficients(double t, double x, double y, const SpectralMeasure& sm);

// xi outside [a, L] gives zero.
ProductKernel product_density(double t, double x, double y, const std::vector<double>& xi_grid,
                              const SpectralMeasure& sm);

// |e^{-t lambda} w(x) w(y) - int w_lambda q_t(x, y, .) r|
double product_formula_residual(double lambda, double t, double x, double y, const SpectralMeasure& sm);

struct MeasureApprox {
  double x = 0.0, y = 0.0;
  std::vector<double> t_schedule;
  double t_used = 0.0;  // 0 when the exact atoms are known
  std::optional<ProductKernel> density;
  std::vector<double> atoms, atom_weights;
  std::vector<double> probe_lambdas;
  Eigen::MatrixXd moments;             // schedule x probes: int w_lambda d nu_t
  std::vector<double> gaps;            // max over probes of consecutive differences
  std::vector<double> limit_moments;   // extrapolated to t = 0
  std::vector<double> exact_moments;   // w_lambda(x) w_lambda(y)
  double mass = 1.0;
};

inline const std::vector<double> kDefaultTSchedule{0.1, 0.03, 0.01, 0.003, 0.001};

MeasureApprox approx_nu(double x, double y, const std::vector<double>& t_schedule, const SpectralMeasure& sm,
                        const std::vector<double>& probe_lambdas = {0.5, 1.0, 2.0},
                        const std::vector<double>& xi_grid = {});

struct SupportReport {
  std::string kcase;  // a, b, c, d, e, degenerate_full, extrapolated_e
  std::vector<std::pair<double, double>> support;  // in x; atoms are [p, p]
  SupportParams params;
  bool gamma_mapped = false;
  bool atomic = false;
  std::vector<double> atoms, weights;  // two-atom formula when atomic
};

SupportReport classify_support(double x, double y, const MpCertificate& cert);

// (T^y h)(x) on out_grid. t_reg = 0 needs a certificate whose classification is
// atomic at every (x, y) requested.
GridFunction translate(const GridFunction& h, double y, const SpectralMeasure& sm, double t_reg,
                       const std::vector<double>& out_grid, const MpCertificate* cert = nullptr);

GridFunction convolve_functions(const GridFunction& h, const GridFunction& g, const SpectralMeasure& sm,
                                double t_reg, const std::vector<double>& out_grid);

struct DiscreteMeasure {
  std::vector<double> points, weights;
};

struct MeasureConvolution {
  std::vector<double> lambdas;
  Eigen::VectorXd mu_hat, nu_hat, product;
  double t_reg = 0.0;
  std::vector<double> xi;
  Eigen::VectorXd density;
};

// Transform of a discrete measure on the atoms of sm.
Eigen::VectorXd measure_transform(const DiscreteMeasure& mu, const SpectralMeasure& sm);

MeasureConvolution convolve_measures(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const SpectralMeasure& sm,
                                     double t_reg = 1e-3, const std::vector<double>& xi_grid = {});

}  // namespace slhyper
