#include "slhyper/spectral.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <numbers>

#include "slhyper/chebyshev.hpp"
#include "slhyper/errors.hpp"
#include "slhyper/parallel.hpp"

namespace slhyper {
namespace {

// Node-wise cumulative integral of sqrt(r/p) over a mesh.
std::vector<double> gamma_on_nodes(const PanelMesh& mesh) {
  const ChebRule& R = cheb_rule(mesh.n);
  std::vector<double> g;
  g.reserve(mesh.node_count());
  double base = 0.0;
  for (const auto& P : mesh.panels) {
    Eigen::VectorXd f = (P.r.array() / P.p.array()).sqrt().matrix();
    Eigen::VectorXd c = 0.5 * (P.x1 - P.x0) * (R.S * f);
    for (int i = 0; i < mesh.n; ++i) g.push_back(base + c(i));
    base += c(mesh.n - 1);
  }
  return g;
}

double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  if (!(xs[i] > xs[i - 1])) return ys[i];
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

// Eigenvalue guesses from a finite-volume discretisation uniform in gamma.
Eigen::VectorXd fd_guesses(const OperatorSpec& op, const PanelMesh& coarse, int N) {
  std::vector<double> xn = coarse.nodes(), gn = gamma_on_nodes(coarse);
  // Drop duplicated panel edges so the table is strictly increasing.
  std::vector<double> gx, xx;
  for (std::size_t i = 0; i < xn.size(); ++i) {
    if (!gx.empty() && gn[i] <= gx.back()) continue;
    gx.push_back(gn[i]);
    xx.push_back(xn[i]);
  }
  const double Lg = gx.back();
  std::vector<double> x(N + 2);
  x[0] = coarse.start;
  x[N + 1] = coarse.end();
  for (int i = 1; i <= N; ++i) x[i] = interp_linear(gx, xx, Lg * i / (N + 1));
  std::vector<double> c(N + 1), m(N + 1);
  for (int i = 0; i <= N; ++i) c[i] = op.p(0.5 * (x[i] + x[i + 1])) / (x[i + 1] - x[i]);
  for (int i = 0; i <= N; ++i) {
    double lo = i == 0 ? x[0] : 0.5 * (x[i - 1] + x[i]);
    double hi = 0.5 * (x[i] + x[i + 1]);
    m[i] = op.r(0.5 * (lo + hi)) * (hi - lo);
  }
  Eigen::VectorXd diag(N + 1), sub(N);
  for (int i = 0; i <= N; ++i) diag(i) = ((i > 0 ? c[i - 1] : 0.0) + c[i]) / m[i];
  for (int i = 0; i < N; ++i) sub(i) = -c[i] / (std::sqrt(m[i]) * std::sqrt(m[i + 1]));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DomainError("tridiagonal eigenproblem failed");
  return es.eigenvalues();
}

struct Refiner {
  const OperatorSpec& op;
  const PanelMesh& mesh;
  double L;

  SweepResult<double> at(double lam, bool deriv) const { return sweep<double>(op, mesh, lam, L, deriv); }

  // k-th Dirichlet eigenvalue (1-based) above lo using the zero count.
  double refine(int k, double lo, double guess) const {
    double lam = std::max(guess, lo + 1e-12 * std::max(1.0, std::fabs(lo)));
    bool ok = false;
    for (int it = 0; it < 12; ++it) {
      auto s = at(lam, true);
      if (s.dw == 0.0 || !std::isfinite(s.dw)) break;
      double next = lam - s.w / s.dw;
      if (!std::isfinite(next) || next <= lo) break;
      double step = std::fabs(next - lam);
      lam = next;
      if (step <= 1e-13 * std::max(1.0, std::fabs(lam))) {
        // The last sweep ran within a rounding step of lam.
        ok = s.interior_sign_changes == k - 1;
        break;
      }
    }
    if (ok) return lam;
    return bracket(k, lo, guess);
  }

  double bracket(int k, double lo, double guess) const {
    auto Z = [&](double l) { return at(l, false).sign_changes; };
    double hi = std::max(guess, lo) * 1.2 + 1.0;
    for (int i = 0; i < 200 && Z(hi) < k; ++i) hi = 2.0 * hi + 1.0;
    if (Z(lo) > k - 1) {
      double step = std::max(1.0, std::fabs(lo));
      for (int i = 0; i < 200 && Z(lo) > k - 1; ++i, step *= 2.0) lo -= step;
    }
    for (int i = 0; i < 200; ++i) {
      int zl = Z(lo), zh = Z(hi);
      if (zl == k - 1 && zh == k) break;
      double mid = 0.5 * (lo + hi);
      if (Z(mid) >= k) hi = mid;
      else lo = mid;
    }
    auto f = [&](double l) { return at(l, false).w; };
    auto tol = [](double u, double v) { return std::fabs(u - v) <= 1e-14 * std::max(1.0, std::fabs(u)); };
    std::uintmax_t iters = 200;
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (a + b);
  }
};

}  // namespace

SpectralMeasure build_spectral_measure(std::shared_ptr<const Kernel> kernel, double L, int N,
                                       const SpectralOptions& opts) {
  const OperatorSpec& op = kernel->op();
  if (N < 16) throw DomainError("spectral measure needs N >= 16");
  double start = kernel->start();
  if (!(L > start)) throw DomainError("L must exceed the left endpoint");
  if (std::isfinite(op.b) && !(L < op.b)) throw DomainError("L must lie below b");

  SpectralMeasure sm;
  sm.L = L;
  sm.N = N;
  sm.kernel = kernel;
  sm.sigma2 = opts.sigma2;
  if (std::isnan(sm.sigma2)) {
    sm.sigma2 = 0.0;
    if (op.p.expr() && op.r.expr()) {
      try {
        StandardForm sf(op, op.c);
        sm.sigma2 = sf.sigma() * sf.sigma();
      } catch (const DomainError&) {
        sm.sigma2 = 0.0;
      }
    }
  }

  PanelMesh coarse = build_mesh(op, start, L, 1.0, true);
  double Lg = gamma_on_nodes(coarse).back();
  double cap = std::pow(std::numbers::pi * N / (2.0 * Lg), 2);
  sm.lambda_cap = opts.lambda_max > 0.0 ? std::min(opts.lambda_max, cap) : cap;

  auto mesh = std::make_shared<PanelMesh>(build_mesh(op, start, L, 1.1 * sm.lambda_cap, true));
  Eigen::VectorXd guess = fd_guesses(op, coarse, N);

  Refiner ref{op, *mesh, L};
  std::vector<double> lams;
  double lo = guess(0) - 1.0 - std::fabs(guess(0));
  for (int k = 1; k <= N + 1; ++k) {
    double g;
    std::size_t n = lams.size();
    if (n >= 2 && lams[n - 1] > sm.sigma2 && lams[n - 2] > sm.sigma2) {
      double s1 = std::sqrt(lams[n - 1] - sm.sigma2), s0 = std::sqrt(lams[n - 2] - sm.sigma2);
      g = sm.sigma2 + std::pow(2.0 * s1 - s0, 2);
    } else {
      g = guess(k - 1);
    }
    double lam = ref.refine(k, lo, g);
    if (lam > sm.lambda_cap) break;
    lams.push_back(lam);
    lo = lam;
  }
  if (lams.empty()) throw DomainError("no eigenvalue below the spectral cap");

  sm.table = tabulate(op, mesh, lams, opts.with_w1);
  const auto K = static_cast<Eigen::Index>(lams.size());
  sm.lambda = Eigen::Map<Eigen::VectorXd>(lams.data(), K);
  std::vector<double> cw = mesh->weights();
  sm.qw.resize(static_cast<Eigen::Index>(cw.size()));
  {
    Eigen::Index i = 0;
    for (const auto& P : mesh->panels)
      for (int j = 0; j < mesh->n; ++j, ++i) sm.qw(i) = P.cw(j) * P.r(j);
  }
  sm.mass.resize(K);
  sm.integral_w.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    double norm2 = sm.qw.dot(sm.table.W.col(k).cwiseAbs2());
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw DomainError("non-positive mass: discretisation too coarse");
    sm.mass(k) = 1.0 / norm2;
    sm.integral_w(k) = sm.qw.dot(sm.table.W.col(k));
  }
  for (Eigen::Index k = 0; k < K; ++k)
    if (std::fabs(sm.lambda(k) - sm.sigma2) < 0.05) sm.near_bottom.push_back(static_cast<std::size_t>(k));
  return sm;
}

Eigen::VectorXd SpectralMeasure::w_at(double x) const {
  const auto& op = kernel->op();
  if (x < op.a || x > L * (1.0 + 1e-14) + 1e-300) throw DomainError("x outside [a, L]");
  return interp_all(table, make_plan(*table.mesh, std::min(x, L)));
}

Eigen::VectorXd SpectralMeasure::w1_at(double x) const {
  const auto& op = kernel->op();
  if (x < op.a || x > L * (1.0 + 1e-14) + 1e-300) throw DomainError("x outside [a, L]");
  return interp_all_w1(table, make_plan(*table.mesh, std::min(x, L)));
}

double SpectralMeasure::cumulative_step(double Lambda) const {
  double c = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (lambda(k) <= Lambda) c += mass(k);
  return c;
}

double SpectralMeasure::cumulative(double Lambda) const {
  const Eigen::Index K = lambda.size();
  if (K < 2) return cumulative_step(Lambda);
  std::vector<double> s(K);
  for (Eigen::Index k = 0; k < K; ++k) s[k] = std::sqrt(std::max(lambda(k) - sigma2, 0.0));
  double target = std::sqrt(std::max(Lambda - sigma2, 0.0));
  std::vector<double> b(K + 1);
  b[0] = std::max(0.0, s[0] - 0.5 * (s[1] - s[0]));
  for (Eigen::Index k = 1; k < K; ++k) b[k] = 0.5 * (s[k - 1] + s[k]);
  b[K] = s[K - 1] + 0.5 * (s[K - 1] - s[K - 2]);
  if (target <= b[0]) return 0.0;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    if (target < b[k + 1]) {
      double width = b[k + 1] - b[k];
      return acc + (width > 0 ? mass(k) * (target - b[k]) / width : mass(k));
    }
    acc += mass(k);
  }
  return acc;
}

Eigen::VectorXd sample_on_mesh(const GridFunction& h, const SpectralMeasure& sm) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(sm.mesh().node_count()));
  Eigen::Index i = 0;
  for (const auto& P : sm.mesh().panels)
    for (int j = 0; j < sm.mesh().n; ++j, ++i) v(i) = h(P.x(j));
  return v;
}

TransformTable forward_transform(const GridFunction& h, const SpectralMeasure& sm) {
  Eigen::VectorXd hv = sample_on_mesh(h, sm);
  for (Eigen::Index i = 0; i < hv.size(); ++i)
    if (!std::isfinite(hv(i))) throw DomainError("function is not finite on the quadrature mesh");
  Eigen::VectorXd weighted = sm.qw.cwiseProduct(hv);
  TransformTable t;
  t.lambdas.assign(sm.lambda.data(), sm.lambda.data() + sm.lambda.size());
  t.values = sm.table.W.transpose() * weighted;
  t.source_norm = std::sqrt(weighted.dot(hv));
  return t;
}

GridFunction inverse_transform(const TransformTable& tbl, const SpectralMeasure& sm,
                               const std::vector<double>& out_grid) {
  if (tbl.values.size() != sm.lambda.size() || tbl.lambdas.size() != sm.size())
    throw DomainError("transform table does not match the measure");
  for (std::size_t k = 0; k < tbl.lambdas.size(); ++k)
    if (tbl.lambdas[k] != sm.lambda(static_cast<Eigen::Index>(k)))
      throw DomainError("transform table does not match the measure");
  Eigen::VectorXd coef = tbl.values.cwiseProduct(sm.mass);
  std::vector<double> v(out_grid.size());
  parallel_for(out_grid.size(), [&](std::size_t i) { v[i] = sm.w_at(out_grid[i]).dot(coef); });
  return GridFunction(out_grid, std::move(v));
}

std::vector<cplx> transform_at(const GridFunction& h, const Kernel& k, const std::vector<cplx>& lambdas) {
  double lam_max = 1.0;
  for (auto l : lambdas) lam_max = std::max(lam_max, std::abs(l));
  double hi = h.hi();
  if (hi <= k.start()) {
    std::vector<cplx> out(lambdas.size());
    return out;
  }
  auto mesh = k.mesh_for(lam_max, hi);
  const std::size_t nn = mesh->node_count();
  Eigen::VectorXd wh(static_cast<Eigen::Index>(nn));
  {
    // Integrate piece by piece between the grid points of h, so the quadrature
    // follows h rather than the kernel mesh; w comes from the panel interpolant.
    using G20 = boost::math::quadrature::gauss<double, 20>;
    using G6 = boost::math::quadrature::gauss<double, 6>;
    const ChebRule& R = cheb_rule(mesh->n);
    std::vector<double> card(static_cast<std::size_t>(mesh->n));
    const std::vector<double>& hx = h.grid();
    const double lo = h.lo();
    wh.setZero();
    Eigen::Index i = 0;
    std::vector<double> cuts;
    for (const auto& P : mesh->panels) {
      const double u0 = std::max(lo, P.x0), u1 = std::min(hi, P.x1);
      if (u1 > u0) {
        cuts.assign({u0});
        for (auto it = std::upper_bound(hx.begin(), hx.end(), u0); it != hx.end() && *it < u1; ++it) cuts.push_back(*it);
        cuts.push_back(u1);
        const double width = P.x1 - P.x0;
        auto add = [&](const auto& ab, const auto& wt, double c0, double c1) {
          const double mid = 0.5 * (c0 + c1), half = 0.5 * (c1 - c0);
          for (std::size_t g = 0; g < ab.size(); ++g)
            for (double sgn : {-1.0, 1.0}) {
              if (ab[g] == 0.0 && sgn > 0.0) continue;
              const double x = mid + sgn * half * ab[g];
              const double f = half * wt[g] * k.op().r(x) * h(x);
              if (f == 0.0) continue;
              R.cardinal(2.0 * (x - P.x0) / width - 1.0, card.data());
              for (int j = 0; j < mesh->n; ++j) wh(i + j) += f * card[static_cast<std::size_t>(j)];
            }
        };
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
          if (cuts[c + 1] <= cuts[c]) continue;
          if (cuts[c + 1] - cuts[c] > 0.1 * width)
            add(G20::abscissa(), G20::weights(), cuts[c], cuts[c + 1]);
          else
            add(G6::abscissa(), G6::weights(), cuts[c], cuts[c + 1]);
        }
      }
      i += mesh->n;
    }
  }
  std::vector<cplx> out(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t q) {
    std::vector<cplx> w(nn);
    sweep<cplx>(k.op(), *mesh, lambdas[q], mesh->end(), false, w.data());
    cplx acc = 0.0;
    for (std::size_t i = 0; i < nn; ++i) acc += wh(static_cast<Eigen::Index>(i)) * w[i];
    out[q] = acc;
  });
  return out;
}

Eigen::VectorXd heat_factors(double t, const SpectralMeasure& sm) {
  if (!(t > 0.0)) throw DomainError("t must be positive");
  Eigen::VectorXd f(sm.lambda.size());
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    double e = std::exp(-t * sm.lambda(k));
    f(k) = e < 1e-16 ? 0.0 : e;
  }
  return f;
}

double heat_kernel(double t, double x, double y, const SpectralMeasure& sm) {
  Eigen::VectorXd f = heat_factors(t, sm).cwiseProduct(sm.mass);
  return (f.cwiseProduct(sm.w_at(x))).dot(sm.w_at(y));
}

Eigen::MatrixXd heat_kernel_grid(double t, const std::vector<double>& xs, const std::vector<double>& ys,
                                 const SpectralMeasure& sm) {
  Eigen::VectorXd f = heat_factors(t, sm).cwiseProduct(sm.mass);
  const auto K = sm.lambda.size();
  Eigen::MatrixXd WX(K, static_cast<Eigen::Index>(xs.size())), WY(K, static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) WX.col(static_cast<Eigen::Index>(i)) = sm.w_at(xs[i]);
  for (std::size_t i = 0; i < ys.size(); ++i) WY.col(static_cast<Eigen::Index>(i)) = sm.w_at(ys[i]);
  return WX.transpose() * f.asDiagonal() * WY;
}

}  // namespace slhyper
