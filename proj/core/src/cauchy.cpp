#include "slhyper/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quad.hpp"
#include "slhyper/errors.hpp"
#include "slhyper/parallel.hpp"

namespace slhyper {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd columns_at(const SpectralMeasure& sm, const std::vector<double>& xs) {
  const double a = sm.kernel->op().a;
  Eigen::MatrixXd W(sm.lambda.size(), static_cast<Eigen::Index>(xs.size()));
  parallel_for(xs.size(), [&](std::size_t i) {
    double x = xs[i];
    if (x < a || x > sm.L) throw DomainError("point " + std::to_string(x) + " outside [a, L]");
    W.col(static_cast<Eigen::Index>(i)) = x <= a ? Eigen::VectorXd::Ones(sm.lambda.size()) : sm.w_at(x);
  });
  return W;
}

Eigen::MatrixXd shifted_columns(const KernelTable& t, double a_m, const std::vector<double>& ys) {
  Eigen::MatrixXd W(static_cast<Eigen::Index>(t.lambdas.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < ys.size(); ++i) {
    double y = ys[i];
    if (y < a_m || y > t.mesh->end()) throw DomainError("point " + std::to_string(y) + " outside [a_m, L]");
    W.col(static_cast<Eigen::Index>(i)) = interp_all(t, make_plan(*t.mesh, y));
  }
  return W;
}

void check_grid(const std::vector<double>& g, const char* what) {
  if (g.empty()) throw DomainError(std::string(what) + " grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw DomainError(std::string(what) + " grid must be strictly increasing");
}

double fd_step(const std::vector<double>& g) {
  double d = 0.01;
  for (std::size_t i = 1; i < g.size(); ++i) d = std::min(d, 0.25 * (g[i] - g[i - 1]));
  return std::max(d, 1e-3);
}

std::vector<double> shifted(const std::vector<double>& g, double s) {
  std::vector<double> out(g);
  for (double& v : out) v += s;
  return out;
}

// l applied along one axis of f by 5-point differences; lo bounds the stencil.
Eigen::MatrixXd apply_l(const OperatorSpec& op, const std::vector<double>& g, double lo, double hi, double d,
                        bool along_x, const std::function<Eigen::MatrixXd(const std::vector<double>&)>& at) {
  std::vector<double> safe(g);
  for (double& v : safe) v = std::clamp(v, lo + 2.000001 * d, hi - 2.000001 * d);
  Eigen::MatrixXd fm2 = at(shifted(safe, -2 * d)), fm1 = at(shifted(safe, -d)), f0 = at(safe),
                  fp1 = at(shifted(safe, d)), fp2 = at(shifted(safe, 2 * d));
  Eigen::MatrixXd d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * d);
  Eigen::MatrixXd d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * d * d);
  Eigen::MatrixXd out(f0.rows(), f0.cols());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g[i];
    bool ok = x - 2.0 * d > lo && x + 2.0 * d < hi;
    double p = op.p(x), pp = op.p.d1(x), r = op.r(x);
    auto idx = static_cast<Eigen::Index>(i);
    if (along_x) {
      if (ok) out.row(idx) = -(p * d2.row(idx) + pp * d1.row(idx)) / r;
      else out.row(idx).setConstant(kNaN);
    } else {
      if (ok) out.col(idx) = -(p * d2.col(idx) + pp * d1.col(idx)) / r;
      else out.col(idx).setConstant(kNaN);
    }
  }
  return out;
}

void fill_residual(CauchySolution& sol, double y_lo) {
  const auto& op = sol.sm->kernel->op();
  const double L = sol.sm->L;
  double y_hi = sol.shifted ? sol.shifted->mesh->end() : L;
  double dx = fd_step(sol.xs), dy = fd_step(sol.ys);
  Eigen::MatrixXd lx = apply_l(op, sol.xs, op.a, L, dx, true,
                               [&](const std::vector<double>& x) { return sol.eval_grid(x, sol.ys); });
  Eigen::MatrixXd ly = apply_l(op, sol.ys, y_lo, y_hi, dy, false,
                               [&](const std::vector<double>& y) { return sol.eval_grid(sol.xs, y); });
  sol.pde_residual = lx - ly;
  sol.max_pde_residual = 0.0;
  for (Eigen::Index i = 0; i < sol.pde_residual.size(); ++i) {
    double v = sol.pde_residual.data()[i];
    if (std::isfinite(v)) sol.max_pde_residual = std::max(sol.max_pde_residual, std::fabs(v));
  }
}

void check_initial(const GridFunction& h) {
  if (h.empty()) throw DomainError("initial function is empty");
  if (!h.compact_support() || !h.smooth2())
    throw DomainError("initial function must be flagged compact_support and smooth2 (run check_admissible)");
}

}  // namespace

Eigen::MatrixXd CauchySolution::eval_grid(const std::vector<double>& x, const std::vector<double>& y) const {
  if (!sm) throw DomainError("solution has no spectral representation");
  Eigen::MatrixXd WX = columns_at(*sm, x);
  Eigen::MatrixXd WY = shifted ? shifted_columns(*shifted, *shifted_origin, y) : columns_at(*sm, y);
  return WX.transpose() * coef.asDiagonal() * WY;
}

double CauchySolution::eval(double x, double y) const { return eval_grid({x}, {y})(0, 0); }

CauchySolution solve_cauchy(const GridFunction& h, const SpectralMeasure& sm, const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  check_initial(h);
  check_grid(xs, "x");
  check_grid(ys, "y");
  CauchySolution sol;
  sol.h = h;
  sol.xs = xs;
  sol.ys = ys;
  sol.sm = &sm;
  sol.coef = forward_transform(h, sm).values.cwiseProduct(sm.mass);
  sol.f = sol.eval_grid(xs, ys);
  fill_residual(sol, sm.kernel->op().a);
  return sol;
}

CauchySolution solve_cauchy_shifted(const GridFunction& h, double a_m, const SpectralMeasure& sm,
                                    const std::vector<double>& xs, const std::vector<double>& ys) {
  check_initial(h);
  check_grid(xs, "x");
  check_grid(ys, "y");
  const auto& op = sm.kernel->op();
  if (!(a_m > op.a && a_m <= ys.front())) throw DomainError("shifted origin must satisfy a < a_m <= min(y grid)");
  if (ys.back() > sm.L) throw DomainError("y grid exceeds L");
  CauchySolution sol;
  sol.h = h;
  sol.xs = xs;
  sol.ys = ys;
  sol.sm = &sm;
  sol.shifted_origin = a_m;
  sol.coef = forward_transform(h, sm).values.cwiseProduct(sm.mass);
  double y_end = std::min(sm.L, ys.back() + 0.1);
  auto mesh = sm.kernel->mesh_from(a_m, sm.lambda.maxCoeff(), y_end);
  std::vector<double> lams(sm.lambda.data(), sm.lambda.data() + sm.lambda.size());
  sol.shifted = std::make_shared<const KernelTable>(tabulate(op, mesh, lams));
  sol.f = sol.eval_grid(xs, ys);
  fill_residual(sol, a_m);
  return sol;
}

TriangleIdentityReport triangle_identity(const MpCertificate& cert, double c, double x, double y, int n,
                                         const std::function<Eigen::MatrixXd(const std::vector<double>& xi,
                                                                             const std::vector<double>& zeta)>& u) {
  if (!(c <= y && y <= x)) throw DomainError("triangle needs c <= y <= x");
  if (!(y > c)) throw DomainError("degenerate triangle (y = c)");
  if (n < 4) throw DomainError("triangle refinement n must be at least 4");
  const StandardForm& sf = *cert.sf;
  const double d = (y - c) / n;
  if (!sf.degenerate() && !(c - 2.0 * d > 0.0)) throw DomainError("triangle stencil reaches gamma(a)");
  const int NX = 2 * n + 5, NZ = n + 5;
  std::vector<double> xi(NX), zeta(NZ);
  for (int i = 0; i < NX; ++i) xi[i] = x - y + c + (i - 2) * d;
  for (int j = 0; j < NZ; ++j) zeta[j] = c + (j - 2) * d;

  const CoefficientExpr& eta = cert.eta;
  auto B = [&](double s) {
    return std::exp(0.5 * detail::adaptive_gk([&](double t) { return eta(t); }, c, s, 1e-13, 1e-15));
  };
  struct Axis {
    std::vector<double> AB, phi, psi, B;
  };
  auto axis = [&](const std::vector<double>& s) {
    Axis ax;
    for (double v : s) {
      double xv = sf.from_std(v);
      const auto& op = sf.op();
      double A = std::sqrt(op.p(xv) * op.r(xv));
      double dl = sf.dlogA_at_x(xv);
      double e = eta(v), de = eta.derivative_at(v);
      double b = B(v);
      ax.B.push_back(b);
      ax.AB.push_back(A / (b * b));
      ax.phi.push_back(dl - e);
      ax.psi.push_back(0.5 * de - 0.25 * e * e + 0.5 * dl * e);
    }
    return ax;
  };
  Axis X = axis(xi), Z = axis(zeta);
  Eigen::MatrixXd U = u(xi, zeta);
  Eigen::MatrixXd V(NX, NZ);
  for (int i = 0; i < NX; ++i)
    for (int j = 0; j < NZ; ++j) V(i, j) = X.B[i] * Z.B[j] * U(i, j);

  // Lattice index helpers: i, j count from the triangle's corner.
  auto v = [&](int i, int j) { return V(i + 2, j + 2); };
  auto dz = [&](int i, int j) { return (v(i, j - 2) - 8 * v(i, j - 1) + 8 * v(i, j + 1) - v(i, j + 2)) / (12 * d); };
  auto dx = [&](int i, int j) { return (v(i - 2, j) - 8 * v(i - 1, j) + 8 * v(i + 1, j) - v(i + 2, j)) / (12 * d); };
  auto dzz = [&](int i, int j) {
    return (-v(i, j - 2) + 16 * v(i, j - 1) - 30 * v(i, j) + 16 * v(i, j + 1) - v(i, j + 2)) / (12 * d * d);
  };
  auto dxx = [&](int i, int j) {
    return (-v(i - 2, j) + 16 * v(i - 1, j) - 30 * v(i, j) + 16 * v(i + 1, j) - v(i + 2, j)) / (12 * d * d);
  };
  auto ABx = [&](int i) { return X.AB[i + 2]; };
  auto ABz = [&](int j) { return Z.AB[j + 2]; };
  auto trap = [&](int lo, int hi, const std::function<double(int)>& g) {
    if (hi <= lo) return 0.0;
    double s = 0.5 * (g(lo) + g(hi));
    for (int k = lo + 1; k < hi; ++k) s += g(k);
    return s * d;
  };

  TriangleIdentityReport rep;
  rep.c = c;
  rep.x = x;
  rep.y = y;
  rep.n = n;
  rep.lhs = ABx(n) * ABz(n) * v(n, n);
  rep.H = 0.5 * ABz(0) * (ABx(0) * v(0, 0) + ABx(2 * n) * v(2 * n, 0));
  rep.I0 = 0.5 * ABz(0) * trap(0, 2 * n, [&](int i) { return ABx(i) * dz(i, 0); });
  rep.I1 = 0.5 * trap(0, n, [&](int j) {
    return ABz(j) * ABx(j) * (Z.phi[j + 2] + X.phi[j + 2]) * v(j, j);
  });
  rep.I2 = 0.5 * trap(0, n, [&](int j) {
    int i = 2 * n - j;
    return ABz(j) * ABx(i) * (Z.phi[j + 2] - X.phi[i + 2]) * v(i, j);
  });
  rep.I3 = 0.5 * trap(0, n, [&](int j) {
    return trap(j, 2 * n - j, [&](int i) { return ABx(i) * ABz(j) * (Z.psi[j + 2] - X.psi[i + 2]) * v(i, j); });
  });
  rep.I4 = 0.5 * trap(0, n, [&](int j) {
    return trap(j, 2 * n - j, [&](int i) {
      double lz = -dzz(i, j) - Z.phi[j + 2] * dz(i, j) + Z.psi[j + 2] * v(i, j);
      double lx = -dxx(i, j) - X.phi[i + 2] * dx(i, j) + X.psi[i + 2] * v(i, j);
      return ABx(i) * ABz(j) * (lz - lx);
    });
  });
  rep.rhs = rep.H + rep.I0 + rep.I1 + rep.I2 + rep.I3 - rep.I4;
  rep.residual = std::fabs(rep.lhs - rep.rhs);
  return rep;
}

TriangleIdentityReport triangle_identity_residual(const CauchySolution& sol, const MpCertificate& cert, double c,
                                                  double x, double y, int n) {
  const StandardForm& sf = *cert.sf;
  const double d = (y - c) / n;
  auto inside = [](const std::vector<double>& g, double lo, double hi) { return lo >= g.front() && hi <= g.back(); };
  double xlo = sf.from_std(x - y + c - 2 * d), xhi = sf.from_std(x + y - c + 2 * d);
  double ylo = sf.from_std(c - 2 * d), yhi = sf.from_std(y + 2 * d);
  if (!inside(sol.xs, xlo, xhi) || !inside(sol.ys, ylo, yhi)) throw DomainError("triangle exits the solution grid");
  auto u = [&](const std::vector<double>& xi, const std::vector<double>& zeta) {
    std::vector<double> xs, ys;
    for (double s : xi) xs.push_back(sf.from_std(s));
    for (double s : zeta) ys.push_back(sf.from_std(s));
    return sol.eval_grid(xs, ys);
  };
  return triangle_identity(cert, c, x, y, n, u);
}

PositivityReport positivity_report(const CauchySolution& sol, bool strict) {
  double hmax = 0.0;
  for (double v : sol.h.values()) hmax = std::max(hmax, std::fabs(v));
  for (double v : sol.h.values())
    if (v < -1e-14 * hmax) throw DomainError("positivity report needs a nonnegative initial function");
  PositivityReport rep;
  if (sol.f.size() == 0) return rep;
  rep.min_value = sol.f.minCoeff();
  rep.max_value = sol.f.maxCoeff();
  if (strict) {
    rep.strict_checked = true;
    Eigen::Index pos = (sol.f.array() > 1e-10).count();
    rep.strict_positive_fraction = static_cast<double>(pos) / static_cast<double>(sol.f.size());
  }
  return rep;
}

}  // namespace slhyper
