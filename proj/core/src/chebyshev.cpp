#include "slhyper/chebyshev.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace slhyper {
namespace {

// Chebyshev polynomial values T_0..T_{m-1} at t.
void cheb_values(double t, int m, double* T) {
  T[0] = 1.0;
  if (m > 1) T[1] = t;
  for (int k = 2; k < m; ++k) T[k] = 2.0 * t * T[k - 1] - T[k - 2];
}

std::unique_ptr<ChebRule> build(int n) {
  auto r = std::make_unique<ChebRule>();
  r->n = n;
  r->t.resize(n);
  for (int j = 0; j < n; ++j) r->t[j] = -std::cos(std::numbers::pi * j / (n - 1));
  r->t[0] = -1.0;
  r->t[n - 1] = 1.0;
  if (n % 2 == 1) r->t[n / 2] = 0.0;

  Eigen::MatrixXd V(n, n), Vint(n, n);
  std::vector<double> T(n + 2);
  for (int i = 0; i < n; ++i) {
    double ti = r->t[i];
    cheb_values(ti, n + 1, T.data());
    for (int k = 0; k < n; ++k) {
      V(i, k) = T[k];
      double val;
      if (k == 0) {
        val = ti + 1.0;
      } else if (k == 1) {
        val = 0.5 * (ti * ti - 1.0);
      } else {
        double sgn_kp1 = (k + 1) % 2 == 0 ? 1.0 : -1.0;
        double sgn_km1 = (k - 1) % 2 == 0 ? 1.0 : -1.0;
        val = 0.5 * (T[k + 1] / (k + 1) - T[k - 1] / (k - 1)) -
              0.5 * (sgn_kp1 / (k + 1) - sgn_km1 / (k - 1));
      }
      Vint(i, k) = val;
    }
  }
  r->to_coef = V.fullPivLu().inverse();
  r->S = Vint * r->to_coef;
  r->wq.resize(n);
  for (int j = 0; j < n; ++j) r->wq[j] = r->S(n - 1, j);
  r->bw.resize(n);
  for (int j = 0; j < n; ++j) {
    double w = (j % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == n - 1) w *= 0.5;
    r->bw[j] = w;
  }
  return r;
}

}  // namespace

void ChebRule::cardinal(double tt, double* out) const {
  for (int j = 0; j < n; ++j) {
    if (tt == t[j]) {
      for (int k = 0; k < n; ++k) out[k] = (k == j) ? 1.0 : 0.0;
      return;
    }
  }
  double denom = 0.0;
  for (int j = 0; j < n; ++j) {
    out[j] = bw[j] / (tt - t[j]);
    denom += out[j];
  }
  for (int j = 0; j < n; ++j) out[j] /= denom;
}

const ChebRule& cheb_rule(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<ChebRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build(n)).first;
  return *it->second;
}

}  // namespace slhyper
