#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <queue>
#include <vector>

namespace slhyper::detail {

// Globally adaptive Gauss-Kronrod quadrature. Boost's recursive driver compares
// an unscaled error estimate with a scaled tolerance, which forces full-depth
// recursion on short intervals, so the bisection is done here instead.
template <unsigned N = 31, class F>
double adaptive_gk(F f, double a, double b, double rel_tol, double abs_tol = 0.0, int max_intervals = 4000) {
  if (a == b) return 0.0;
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto rule = [&](double lo, double hi) {
    double mid = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    auto g = [&](double t) { return f(mid + h * t); };
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, N>::integrate(g, -1.0, 1.0, 0, 0.0, &err);
    return Piece{lo, hi, v * h, err * std::fabs(h)};
  };
  std::priority_queue<Piece> q;
  Piece first = rule(a, b);
  double total = first.value, err = first.error;
  q.push(first);
  int count = 1;
  while (count < max_intervals) {
    if (err <= std::max(abs_tol, rel_tol * std::fabs(total)) || !std::isfinite(total)) break;
    Piece top = q.top();
    double mid = 0.5 * (top.a + top.b);
    if (!(mid > top.a && mid < top.b)) break;
    q.pop();
    Piece l = rule(top.a, mid), r = rule(mid, top.b);
    total += l.value + r.value - top.value;
    err += l.error + r.error - top.error;
    q.push(l);
    q.push(r);
    ++count;
  }
  return total;
}

}  // namespace slhyper::detail
