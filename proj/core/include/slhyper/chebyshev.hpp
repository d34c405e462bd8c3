#pragma once

#include <Eigen/Dense>
#include <vector>

namespace slhyper {

// Chebyshev-Lobatto panel rule on [-1, 1] (nodes ascending, endpoints included).
struct ChebRule {
  int n = 0;
  std::vector<double> t;
  Eigen::MatrixXd S;        // (S f)_i = integral of the interpolant from -1 to t_i
  std::vector<double> wq;   // Clenshaw-Curtis weights on [-1, 1]
  std::vector<double> bw;   // barycentric weights
  Eigen::MatrixXd to_coef;  // node values -> Chebyshev coefficients

  // Lagrange cardinal values at t (out has n entries).
  void cardinal(double tt, double* out) const;
};

// Rules are built once per size and shared; access is thread safe.
const ChebRule& cheb_rule(int n);

}  // namespace slhyper
