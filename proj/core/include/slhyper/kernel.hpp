#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "slhyper/operator_model.hpp"

namespace slhyper {

using cplx = std::complex<double>;

struct KernelValue {
  cplx lambda;
  double x = 0.0;
  cplx w;
  cplx w1;  // quasi-derivative p w'
  double est_error = 0.0;
};

// One Chebyshev-Lobatto panel with the integral operators of the Volterra
// form precomputed:  w = w0 + w10 * u - lambda * K w,  w1 = w10 - lambda * SR w.
struct Panel {
  double x0 = 0.0, x1 = 0.0;
  Eigen::VectorXd x, p, r, cw;  // nodes, coefficients, quadrature weights
  Eigen::MatrixXd K, SR;
  Eigen::VectorXd u;
  double S0 = 0.0, S1 = 0.0;    // eta_1 at both ends
  Eigen::MatrixXd eta, m;       // series terms at the nodes (empty when unused)
};

struct PanelMesh {
  double a = 0.0;       // true left endpoint
  double start = 0.0;   // first node
  double lam_max = 1.0;
  int n = 24;
  std::vector<Panel> panels;

  double end() const { return panels.empty() ? start : panels.back().x1; }
  std::size_t node_count() const { return panels.size() * static_cast<std::size_t>(n); }
  std::size_t locate(double x) const;  // panel with x0 <= x <= x1 (clamped)
  std::vector<double> nodes() const;
  std::vector<double> weights() const;  // panel Clenshaw-Curtis weights
};

// First usable point at or near a (a itself when p(a), r(a) are finite and positive).
double effective_start(const OperatorSpec& op);

// Panels from start covering [start, end]; with exact_end the last edge is end.
PanelMesh build_mesh(const OperatorSpec& op, double start, double end, double lam_max, bool exact_end);
void extend_mesh(const OperatorSpec& op, PanelMesh& mesh, double end);

template <class T>
struct SweepResult {
  T w{}, w1{}, dw{}, dw1{};
  int sign_changes = 0;           // over all nodes up to and including the end point
  int interior_sign_changes = 0;  // same, excluding the end point
  double est_error = 0.0;
};

// Integrates from mesh.start to x_end (<= mesh.end()). Node values of all
// panels fully inside [start, x_end] are written to wn / w1n when given.
template <class T>
SweepResult<T> sweep(const OperatorSpec& op, const PanelMesh& mesh, T lambda, double x_end, bool deriv,
                     T* wn = nullptr, T* w1n = nullptr);

// Node values of w_lambda for a list of real lambdas (columns).
struct KernelTable {
  std::shared_ptr<const PanelMesh> mesh;
  std::vector<double> lambdas;
  Eigen::MatrixXd W;   // node_count x lambdas
  Eigen::MatrixXd W1;  // empty unless requested
};

KernelTable tabulate(const OperatorSpec& op, std::shared_ptr<const PanelMesh> mesh,
                     const std::vector<double>& lambdas, bool with_w1 = false);

// Barycentric evaluation of table columns at a point, shared across columns.
struct InterpPlan {
  bool exact_one = false;  // point at or before the first node: w = 1
  std::size_t offset = 0;
  Eigen::VectorXd weights;
};
InterpPlan make_plan(const PanelMesh& mesh, double x);
double interp(const KernelTable& t, const InterpPlan& plan, std::size_t col);
Eigen::VectorXd interp_all(const KernelTable& t, const InterpPlan& plan);
Eigen::VectorXd interp_all_w1(const KernelTable& t, const InterpPlan& plan);

class Kernel {
 public:
  explicit Kernel(const OperatorSpec& op);

  const OperatorSpec& op() const { return *op_; }
  std::shared_ptr<const OperatorSpec> op_ptr() const { return op_; }
  double start() const { return start_; }

  KernelValue eval_w(cplx lambda, double x) const;
  double w(double lambda, double x) const { return eval_w(lambda, x).w.real(); }
  KernelValue eval_w_shifted(cplx lambda, double a_m, double x) const;

  // Mesh from start() suitable for |lambda| <= lam_max and reaching x.
  std::shared_ptr<const PanelMesh> mesh_for(double lam_max, double x) const { return mesh_from(start_, lam_max, x); }
  // Same for a mesh starting at an arbitrary point (shifted solutions).
  std::shared_ptr<const PanelMesh> mesh_from(double start, double lam_max, double x) const;

 private:
  std::shared_ptr<const OperatorSpec> op_;
  double start_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<double, int>, std::shared_ptr<const PanelMesh>> cache_;
};

class KappaShiftedOperator {
 public:
  KappaShiftedOperator(std::shared_ptr<const Kernel> base, double kappa, double x_max);

  double kappa() const { return kappa_; }
  const Kernel& base() const { return *base_; }
  const OperatorSpec& modified() const { return mod_; }
  double w_kappa(double x) const;
  // w_{kappa+lambda}(x) / w_kappa(x)
  cplx w_mod(cplx lambda, double x) const;

 private:
  std::shared_ptr<const Kernel> base_;
  double kappa_;
  std::shared_ptr<KernelTable> table_;
  OperatorSpec mod_;
};

// Requires kappa <= sigma^2; x_max bounds the tabulated range of w_kappa.
KappaShiftedOperator kappa_shift(std::shared_ptr<const Kernel> base, double kappa, double sigma,
                                 double x_max = 50.0);

struct BochnerReport {
  double min_eigenvalue = 0.0;
  bool bound_ok = false;
  double max_abs = 0.0;
  std::vector<double> samples;  // g(tau_j)
};
BochnerReport bochner_check(const Kernel& k, double sigma, double x, double tau_max, int n);

}  // namespace slhyper
