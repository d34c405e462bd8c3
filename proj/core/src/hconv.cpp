#include "slhyper/hconv.hpp"

#include <algorithm>
#include <cmath>

#include "quad.hpp"
#include "slhyper/errors.hpp"
#include "slhyper/parallel.hpp"

namespace slhyper {
namespace {

// Kernel columns at x; zero past L, one at or below the first mesh node.
Eigen::VectorXd w_or_zero(const SpectralMeasure& sm, double x) {
  if (x > sm.L) return Eigen::VectorXd::Zero(sm.lambda.size());
  if (x <= sm.kernel->op().a) return Eigen::VectorXd::Ones(sm.lambda.size());
  return sm.w_at(x);
}

Eigen::VectorXd expand(const SpectralMeasure& sm, const Eigen::VectorXd& coef, const std::vector<double>& xs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  parallel_for(xs.size(), [&](std::size_t i) {
    out(static_cast<Eigen::Index>(i)) = w_or_zero(sm, xs[i]).dot(coef);
  });
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Moment vectors: entry k is int w_lambda w_k r over the mesh.
Eigen::MatrixXd cross_moments(const SpectralMeasure& sm, const std::vector<double>& lambdas) {
  KernelTable t = tabulate(sm.kernel->op(), sm.table.mesh, lambdas);
  Eigen::MatrixXd weighted = sm.qw.asDiagonal() * t.W;
  return sm.table.W.transpose() * weighted;
}

void check_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be positive");
}

double B_of(const CoefficientExpr& eta, double s) {
  if (s == 0.0) return 1.0;
  return std::exp(0.5 * detail::adaptive_gk([&](double u) { return eta(u); }, 0.0, s, 1e-13, 1e-15));
}

double A_std(const StandardForm& sf, double s) {
  if (s == 0.0) {
    const auto& op = sf.op();
    return std::sqrt(op.p(op.a) * op.r(op.a));
  }
  return sf.A(s);
}

double x_of(const StandardForm& sf, double s) { return s == 0.0 ? sf.op().a : sf.from_std(s); }

double s_of(const StandardForm& sf, double x) { return x <= sf.op().a ? 0.0 : sf.to_std(x); }

}  // namespace

Eigen::VectorXd product_coefficients(double t, double x, double y, const SpectralMeasure& sm) {
  check_t(t);
  Eigen::VectorXd c = heat_factors(t, sm).cwiseProduct(sm.mass);
  return c.cwiseProduct(w_or_zero(sm, x)).cwiseProduct(w_or_zero(sm, y));
}

ProductKernel product_density(double t, double x, double y, const std::vector<double>& xi_grid,
                              const SpectralMeasure& sm) {
  const auto& op = sm.kernel->op();
  if (!(x > op.a && x < sm.L && y > op.a && y < sm.L)) throw DomainError("x and y must be interior points of (a, L)");
  ProductKernel pk;
  pk.t = t;
  pk.x = x;
  pk.y = y;
  pk.xi = xi_grid;
  Eigen::VectorXd c = product_coefficients(t, x, y, sm);
  pk.q = expand(sm, c, xi_grid);
  pk.mass = sm.integral_w.dot(c);
  pk.mass_warning = std::fabs(pk.mass - 1.0) > 1e-2;
  return pk;
}

double product_formula_residual(double lambda, double t, double x, double y, const SpectralMeasure& sm) {
  const Kernel& k = *sm.kernel;
  Eigen::VectorXd c = product_coefficients(t, x, y, sm);
  double lhs = std::exp(-t * lambda) * k.w(lambda, x) * k.w(lambda, y);
  double rhs = cross_moments(sm, {lambda}).col(0).dot(c);
  return std::fabs(lhs - rhs);
}

MeasureApprox approx_nu(double x, double y, const std::vector<double>& t_schedule, const SpectralMeasure& sm,
                        const std::vector<double>& probe_lambdas, const std::vector<double>& xi_grid) {
  if (t_schedule.empty()) throw DomainError("empty t schedule");
  for (std::size_t i = 0; i < t_schedule.size(); ++i) {
    check_t(t_schedule[i]);
    if (i > 0 && !(t_schedule[i] < t_schedule[i - 1])) throw DomainError("t schedule must be strictly decreasing");
  }
  const Kernel& k = *sm.kernel;
  const double a = k.op().a;
  MeasureApprox ma;
  ma.x = x;
  ma.y = y;
  ma.t_schedule = t_schedule;
  ma.probe_lambdas = probe_lambdas;
  const auto S = static_cast<Eigen::Index>(t_schedule.size());
  const auto P = static_cast<Eigen::Index>(probe_lambdas.size());
  for (double l : probe_lambdas) ma.exact_moments.push_back(k.w(l, x) * k.w(l, y));

  if (x <= a || y <= a) {
    // nu_{a,y} is the point mass at y.
    ma.t_used = 0.0;
    ma.atoms = {x <= a ? y : x};
    ma.atom_weights = {1.0};
    ma.moments.resize(S, P);
    for (Eigen::Index i = 0; i < S; ++i)
      for (Eigen::Index j = 0; j < P; ++j) ma.moments(i, j) = ma.exact_moments[static_cast<std::size_t>(j)];
    ma.gaps.assign(t_schedule.size() - 1, 0.0);
    ma.limit_moments = ma.exact_moments;
    ma.mass = 1.0;
    return ma;
  }

  Eigen::MatrixXd X = cross_moments(sm, probe_lambdas);
  ma.moments.resize(S, P);
  for (Eigen::Index i = 0; i < S; ++i) {
    Eigen::VectorXd c = product_coefficients(t_schedule[static_cast<std::size_t>(i)], x, y, sm);
    ma.moments.row(i) = (X.transpose() * c).transpose();
  }
  for (Eigen::Index i = 0; i + 1 < S; ++i) ma.gaps.push_back((ma.moments.row(i + 1) - ma.moments.row(i)).cwiseAbs().maxCoeff());
  if (S >= 2) {
    double t1 = t_schedule[t_schedule.size() - 2], t2 = t_schedule.back();
    for (Eigen::Index j = 0; j < P; ++j) {
      double m1 = ma.moments(S - 2, j), m2 = ma.moments(S - 1, j);
      ma.limit_moments.push_back((t1 * m2 - t2 * m1) / (t1 - t2));
    }
  } else {
    for (Eigen::Index j = 0; j < P; ++j) ma.limit_moments.push_back(ma.moments(S - 1, j));
  }
  std::vector<double> grid = xi_grid;
  if (grid.empty()) grid = linspace(sm.start(), sm.L, 801);
  ma.t_used = t_schedule.back();
  ma.density = product_density(ma.t_used, x, y, grid, sm);
  ma.mass = ma.density->mass;
  return ma;
}

SupportReport classify_support(double x, double y, const MpCertificate& cert) {
  if (!cert.checks.all()) throw DomainError("MP not certified: support classification unavailable");
  const StandardForm& sf = *cert.sf;
  const auto& op = sf.op();
  if (!(x >= op.a && x < op.b && y >= op.a && y < op.b)) throw DomainError("x and y must lie in [a, b)");
  SupportReport rep;
  rep.params = support_params(cert);
  if (sf.degenerate()) {
    rep.kcase = "degenerate_full";
    rep.support = {{op.a, op.b}};
    return rep;
  }
  rep.gamma_mapped = true;
  const double X = s_of(sf, x), Y = s_of(sf, y);
  const double lo = std::fabs(X - Y), hi = X + Y;
  const double x0 = rep.params.x0, x1 = rep.params.x1, e0 = rep.params.eta_at_origin;
  const bool x0_inf = std::isinf(x0), x1_inf = std::isinf(x1);
  std::vector<std::pair<double, double>> s;  // standard coordinates
  auto two_atoms = [&] { s = {{lo, lo}, {hi, hi}}; };
  auto full = [&] { s = {{lo, hi}}; };
  if (e0 > 0.0) {
    rep.kcase = "e";
    full();
  } else if (x0_inf && x1_inf) {
    rep.kcase = "extrapolated_e";
    full();
  } else if (x0_inf && x1 == 0.0) {
    rep.kcase = "a";
    two_atoms();
  } else if (!x0_inf && x0 > 0.0 && x1 == 0.0) {
    rep.kcase = "b";
    if (hi <= x0) two_atoms();
    else if (X < x0 && Y < x0) s = {{lo, lo}, {2.0 * x0 - hi, hi}};
    else full();
  } else if (x0_inf && x1 > 0.0 && !x1_inf) {
    rep.kcase = "c";
    if (std::min(X, Y) <= 2.0 * x1) full();
    else s = {{lo, 2.0 * x1 + lo}, {hi - 2.0 * x1, hi}};
  } else if (!x0_inf && x1 > 0.0 && 3.0 * x1 < x0) {
    rep.kcase = "d";
    if (std::min(X, Y) <= 2.0 * x1 || std::max(X, Y) >= x0 - x1) full();
    else s = {{lo, 2.0 * x1 + lo}, {hi - 2.0 * x1, hi}};
  } else {
    rep.kcase = "e";
    full();
  }
  // Merge touching pieces (x = a or x = y collapse atoms).
  std::vector<std::pair<double, double>> merged;
  for (auto piece : s) {
    if (!merged.empty() && piece.first <= merged.back().second) merged.back().second = std::max(merged.back().second, piece.second);
    else merged.push_back(piece);
  }
  for (auto [u, v] : merged) rep.support.emplace_back(x_of(sf, u), u == v ? x_of(sf, u) : x_of(sf, v));
  rep.atomic = std::all_of(merged.begin(), merged.end(), [](const auto& p) { return p.first == p.second; });
  if (rep.atomic) {
    if (merged.size() == 1) {
      rep.atoms = {rep.support[0].first};
      rep.weights = {1.0};
    } else {
      double a0 = A_std(sf, 0.0);
      double AX = A_std(sf, X), AY = A_std(sf, Y), BX = B_of(cert.eta, X), BY = B_of(cert.eta, Y);
      for (double u : {lo, hi}) {
        double w = 0.5 * a0 * A_std(sf, u) * BX * BY / (B_of(cert.eta, u) * AX * AY);
        rep.atoms.push_back(x_of(sf, u));
        rep.weights.push_back(w);
      }
    }
  }
  return rep;
}

GridFunction translate(const GridFunction& h, double y, const SpectralMeasure& sm, double t_reg,
                       const std::vector<double>& out_grid, const MpCertificate* cert) {
  if (h.empty()) throw DomainError("empty function");
  const double a = sm.kernel->op().a;
  if (y <= a) return GridFunction::sample(out_grid, [&](double x) { return h(x); });
  if (t_reg < 0.0 || !std::isfinite(t_reg)) throw DomainError("t_reg must be non-negative");
  if (t_reg == 0.0) {
    if (!cert) throw DomainError("t_reg = 0 needs an atomic support shortcut (no MP certificate given)");
    std::vector<double> v(out_grid.size());
    for (std::size_t i = 0; i < out_grid.size(); ++i) {
      SupportReport rep = classify_support(out_grid[i], y, *cert);
      if (!rep.atomic) throw DomainError("t_reg = 0 needs an atomic support shortcut; case " + rep.kcase + " is not atomic here");
      double acc = 0.0;
      for (std::size_t j = 0; j < rep.atoms.size(); ++j) acc += rep.weights[j] * h(rep.atoms[j]);
      v[i] = acc;
    }
    return GridFunction(out_grid, std::move(v));
  }
  if (y > sm.L) throw DomainError("y beyond the measure's interval");
  TransformTable fh = forward_transform(h, sm);
  Eigen::VectorXd c = heat_factors(t_reg, sm).cwiseProduct(sm.mass).cwiseProduct(sm.w_at(y)).cwiseProduct(fh.values);
  return GridFunction(out_grid, to_vector(expand(sm, c, out_grid)));
}

GridFunction convolve_functions(const GridFunction& h, const GridFunction& g, const SpectralMeasure& sm,
                                double t_reg, const std::vector<double>& out_grid) {
  if (h.empty() || g.empty()) throw DomainError("empty function");
  check_t(t_reg);
  TransformTable fh = forward_transform(h, sm), fg = forward_transform(g, sm);
  if (!std::isfinite(fh.source_norm) || !std::isfinite(fg.source_norm)) throw DomainError("divergent input");
  // Integrating the translates against g collapses to the product of transforms;
  // the product is symmetric in (h, g).
  Eigen::VectorXd c = heat_factors(t_reg, sm).cwiseProduct(sm.mass).cwiseProduct(fh.values.cwiseProduct(fg.values));
  return GridFunction(out_grid, to_vector(expand(sm, c, out_grid)));
}

Eigen::VectorXd measure_transform(const DiscreteMeasure& mu, const SpectralMeasure& sm) {
  if (mu.points.size() != mu.weights.size()) throw DomainError("measure points and weights differ in length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sm.lambda.size());
  for (std::size_t i = 0; i < mu.points.size(); ++i) {
    double x = mu.points[i];
    if (x < sm.kernel->op().a || x > sm.L) throw DomainError("measure atom outside [a, L]");
    out += mu.weights[i] * w_or_zero(sm, x);
  }
  return out;
}

MeasureConvolution convolve_measures(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const SpectralMeasure& sm,
                                     double t_reg, const std::vector<double>& xi_grid) {
  MeasureConvolution mc;
  mc.lambdas = to_vector(sm.lambda);
  mc.mu_hat = measure_transform(mu, sm);
  mc.nu_hat = measure_transform(nu, sm);
  mc.product = mc.mu_hat.cwiseProduct(mc.nu_hat);
  mc.t_reg = t_reg;
  if (t_reg > 0.0) {
    mc.xi = xi_grid.empty() ? linspace(sm.start(), sm.L, 801) : xi_grid;
    Eigen::VectorXd c = heat_factors(t_reg, sm).cwiseProduct(sm.mass).cwiseProduct(mc.product);
    mc.density = expand(sm, c, mc.xi);
  }
  return mc;
}

}  // namespace slhyper
