#include "slhyper/inteq.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>

#include "slhyper/errors.hpp"
#include "slhyper/parallel.hpp"

namespace slhyper {
namespace {

Eigen::VectorXd w_or_zero(const SpectralMeasure& sm, double x) {
  if (x > sm.L) return Eigen::VectorXd::Zero(sm.lambda.size());
  if (x <= sm.kernel->op().a) return Eigen::VectorXd::Ones(sm.lambda.size());
  return sm.w_at(x);
}

std::vector<double> expand(const SpectralMeasure& sm, const Eigen::VectorXd& coef, const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { out[i] = w_or_zero(sm, xs[i]).dot(coef); });
  return out;
}

double transform_real(const GridFunction& f, const Kernel& k, double lambda) {
  return transform_at(f, k, {cplx(lambda, 0.0)})[0].real();
}

}  // namespace

SpectralStrip::SpectralStrip(double kappa, double sigma2) : kappa_(kappa), sigma2_(sigma2) {
  if (!std::isfinite(kappa) || !std::isfinite(sigma2)) throw DomainError("strip parameters must be finite");
  if (kappa > sigma2) throw DomainError("kappa must not exceed sigma^2");
  width_ = std::sqrt(sigma2 - kappa);
}

cplx delta(cplx lambda, double sigma2) {
  cplx d = std::sqrt(lambda - sigma2);
  if (d.imag() < 0.0) d = -d;
  return d;
}

bool SpectralStrip::contains(cplx lambda, double tol) const {
  return std::abs(delta(lambda, sigma2_).imag()) <= width_ + tol;
}

cplx SpectralStrip::boundary(double tau) const {
  cplx z(tau, width_);
  return z * z + sigma2_;
}

double l1_kappa_norm(const GridFunction& h, double kappa, const Kernel& k, double sigma2) {
  if (h.empty()) throw DomainError("empty function");
  if (kappa > sigma2) throw DomainError("kappa must not exceed sigma^2");
  const double hi = h.hi();
  if (hi <= k.start()) return 0.0;
  auto mesh = k.mesh_for(std::max(1.0, std::abs(kappa)), hi);
  KernelTable t = tabulate(k.op(), mesh, {kappa});
  const auto& xs = h.grid();
  std::vector<double> v(xs.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double wk = xs[i] <= k.start() ? 1.0 : interp(t, make_plan(*mesh, xs[i]), 0);
    v[i] = std::abs(h.values()[i]) * std::abs(wk) * k.op().r(std::max(xs[i], k.start()));
    peak = std::max(peak, v[i]);
  }
  if (!std::isfinite(peak) || (peak > 0.0 && v.back() >= 1e-3 * peak))
    throw DomainError("not in L1_kappa: |h| w_kappa r does not decay toward the end of the grid");
  return GridFunction(xs, std::move(v)).integrate();
}

WienerLevyReport wiener_levy_check(const GridFunction& f, const SpectralStrip& strip, cplx rho,
                                   const SpectralMeasure& sm, int n_samples) {
  if (n_samples < 8) throw DomainError("need at least 8 samples per curve");
  if (std::abs(strip.sigma2() - sm.sigma2) > 1e-12 * std::max(1.0, std::abs(sm.sigma2)))
    throw DomainError("strip and measure disagree on sigma^2");
  const Kernel& k = *sm.kernel;
  WienerLevyReport rep;
  rep.norm_bound = l1_kappa_norm(f, strip.kappa(), k, sm.sigma2);
  rep.tail_is_surrogate = !(rep.norm_bound < std::abs(rho));

  const double tau_max = std::sqrt(std::max(sm.lambda.maxCoeff() - sm.sigma2, 1.0));
  const bool flat = strip.half_width() == 0.0;
  std::vector<double> taus(static_cast<std::size_t>(n_samples));
  for (int j = 0; j < n_samples; ++j) taus[static_cast<std::size_t>(j)] = tau_max * j / (n_samples - 1);

  std::vector<cplx> lams;
  for (double tau : taus) lams.emplace_back(tau * tau + sm.sigma2, 0.0);
  if (!flat)
    for (double tau : taus) lams.push_back(strip.boundary(tau));
  std::vector<cplx> ff = transform_at(f, k, lams);
  // f is real, so the conjugate curve carries the conjugate transform.
  if (!flat)
    for (int j = 0; j < n_samples; ++j) {
      std::size_t i = static_cast<std::size_t>(n_samples + j);
      lams.push_back(std::conj(lams[i]));
      ff.push_back(std::conj(ff[i]));
    }
  rep.samples = static_cast<int>(lams.size());

  rep.min_modulus = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lams.size(); ++i) {
    double m = std::abs(rho + ff[i]);
    if (m < rep.min_modulus) {
      rep.min_modulus = m;
      rep.witness = lams[i];
    }
    double tau = taus[i % taus.size()];
    if (tau >= 0.9 * tau_max) rep.tail_bound = std::max(rep.tail_bound, std::abs(ff[i]));
  }
  rep.witness_modulus = rep.min_modulus;

  if (rho.imag() == 0.0) {
    for (int j = 0; j + 1 < n_samples; ++j) {
      double v0 = rho.real() + ff[static_cast<std::size_t>(j)].real();
      double v1 = rho.real() + ff[static_cast<std::size_t>(j + 1)].real();
      if (v0 == 0.0 || v0 * v1 > 0.0) continue;
      auto F = [&](double lam) { return rho.real() + transform_real(f, k, lam); };
      double lo = lams[static_cast<std::size_t>(j)].real(), hi = lams[static_cast<std::size_t>(j + 1)].real();
      std::uintmax_t iters = 100;
      auto tol = boost::math::tools::eps_tolerance<double>(48);
      auto r = boost::math::tools::toms748_solve(F, lo, hi, v0, v1, tol, iters);
      double lam0 = 0.5 * (r.first + r.second);
      double m = std::abs(F(lam0));
      rep.zero_bracketed = true;
      if (m < rep.witness_modulus || rep.witness_modulus == rep.min_modulus) {
        rep.witness = cplx(lam0, 0.0);
        rep.witness_modulus = m;
      }
      rep.min_modulus = std::min(rep.min_modulus, m);
      break;
    }
  }
  rep.ok = !rep.zero_bracketed && rep.min_modulus > 1e-8 && std::abs(rho) - rep.tail_bound > 1e-8;
  return rep;
}

ResolventKernel resolvent_kernel(const GridFunction& f, double rho, const SpectralMeasure& sm,
                                 const std::vector<double>& out_grid, double kappa) {
  if (rho == 0.0) throw DomainError("rho must be non-zero");
  WienerLevyReport chk = wiener_levy_check(f, SpectralStrip(kappa, sm.sigma2), cplx(rho, 0.0), sm);
  if (!chk.ok) throw NotSolvableError("rho + Ff vanishes on the strip; no resolvent kernel", chk);
  TransformTable ff = forward_transform(f, sm);
  ResolventKernel out;
  Eigen::ArrayXd den = rho + ff.values.array();
  out.Fg = (1.0 / den - 1.0 / rho).matrix();
  out.roundtrip = (den * (1.0 / rho + out.Fg.array()) - 1.0).abs().maxCoeff();
  out.g = GridFunction(out_grid, expand(sm, out.Fg.cwiseProduct(sm.mass), out_grid));
  TransformTable fg = forward_transform(out.g, sm);
  double scale = std::max(out.Fg.cwiseAbs().maxCoeff(), 1e-300);
  out.recheck = (fg.values - out.Fg).cwiseAbs().maxCoeff() / scale;
  return out;
}

EquationSolution solve_equation(const EquationProblem& prob, const SpectralMeasure& sm) {
  if (prob.rho.imag() != 0.0) throw DomainError("complex rho needs complex-valued functions; only real rho is supported");
  const double rho = prob.rho.real();
  if (rho == 0.0) throw DomainError("rho must be non-zero");
  if (prob.psi.empty() || prob.f.empty()) throw DomainError("empty function");
  EquationSolution sol;
  sol.check = wiener_levy_check(prob.f, SpectralStrip(prob.kappa, sm.sigma2), prob.rho, sm);
  if (!sol.check.ok) throw NotSolvableError("rho + Ff vanishes on the strip; the equation has no L1_kappa solution", sol.check);

  TransformTable ff = forward_transform(prob.f, sm);
  TransformTable fpsi = forward_transform(prob.psi, sm);
  Eigen::ArrayXd den = rho + ff.values.array();
  Eigen::VectorXd Fg = (1.0 / den - 1.0 / rho).matrix();
  const std::vector<double>& grid = prob.psi.grid();

  // h = psi / rho + psi * g; psi keeps the frequencies above the atom range.
  std::vector<double> conv = expand(sm, fpsi.values.cwiseProduct(Fg).cwiseProduct(sm.mass), grid);
  std::vector<double> hv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) hv[i] = prob.psi.values()[i] / rho + conv[i];
  sol.h = GridFunction(grid, std::move(hv));
  sol.g = GridFunction(grid, expand(sm, Fg.cwiseProduct(sm.mass), grid));

  TransformTable fh = forward_transform(sol.h, sm);
  Eigen::VectorXd res = fh.values.cwiseProduct(den.matrix()) - fpsi.values;
  sol.transform_residual = res.cwiseAbs().maxCoeff() / std::max(fpsi.values.cwiseAbs().maxCoeff(), 1e-300);
  return sol;
}

GridFunction heat_kernel_slice(double t, double x, const SpectralMeasure& sm, const std::vector<double>& grid) {
  if (!(t > 0.0)) throw DomainError("t must be positive");
  if (x < sm.kernel->op().a || x > sm.L) throw DomainError("x outside [a, L]");
  Eigen::VectorXd coef = heat_factors(t, sm).cwiseProduct(sm.mass).cwiseProduct(w_or_zero(sm, x));
  return GridFunction(grid, expand(sm, coef, grid));
}

EquationSolution solve_qt_equation(double t, double x, const GridFunction& psi, const SpectralMeasure& sm) {
  EquationProblem prob;
  prob.f = heat_kernel_slice(t, x, sm, linspace(sm.start(), sm.L, 4001));
  prob.psi = psi;
  prob.kappa = sm.sigma2;
  prob.rho = 1.0;
  return solve_equation(prob, sm);
}

}  // namespace slhyper
