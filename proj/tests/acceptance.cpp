#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "common.hpp"
#include "slhyper/cauchy.hpp"
#include "slhyper/hconv.hpp"
#include "slhyper/inteq.hpp"

using namespace slhyper;
using namespace slhyper::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const Kernel& cos_kernel() { return *cosine_measure().kernel; }
const Kernel& bes_kernel() { return *bessel_measure().kernel; }

Outcome c1() {
  double e = 0.0;
  for (double lam : {0.0, 1.0, 4.0, 10.0})
    for (double x : linspace(0.0, 5.0, 51)) e = std::max(e, std::fabs(cos_kernel().w(lam, x) - std::cos(x * std::sqrt(lam))));
  return {e <= 1e-8, fmt("max err %.3e", e)};
}

Outcome c2() {
  double e = 0.0;
  for (double lam : {0.0, 1.0, 4.0, 10.0})
    for (double x : linspace(0.0, 5.0, 51)) e = std::max(e, std::fabs(bes_kernel().w(lam, x) - sinc_kernel(lam, x)));
  double at0 = bes_kernel().w(7.0, 0.0);
  return {e <= 1e-7 && at0 == 1.0, fmt("max err %.3e, w(0) = %.17g", e, at0)};
}

Outcome c3() {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> L(0.0, 60.0), X(0.0, 12.0);
  double m = 0.0;
  for (int i = 0; i < 200; ++i) {
    double lam = L(gen), x = X(gen);
    m = std::max({m, std::fabs(cos_kernel().w(lam, x)), std::fabs(bes_kernel().w(lam, x))});
  }
  return {m <= 1.0 + 1e-9, fmt("max |w| %.12f", m)};
}

Outcome c4() {
  const SpectralMeasure& sm = cosine_measure();
  double e = 0.0;
  for (double Lam : {1.0, 4.0, 16.0}) e = std::max(e, std::fabs(sm.cumulative(Lam) - 2.0 * std::sqrt(Lam) / kPi));
  double lo = sm.lambda.minCoeff();
  return {e <= 0.02 && lo >= -0.05, fmt("cumulative err %.3e, smallest atom %.3e", e, lo)};
}

Outcome c5() {
  const SpectralMeasure& sm = cosine_measure();
  GridFunction h = bump_fn(0.0, 10.0, 2001, 4.0, 2.5);
  TransformTable t = forward_transform(h, sm);
  GridFunction back = inverse_transform(t, sm, h.grid());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    num += std::pow(back.values()[i] - h.values()[i], 2);
    den += std::pow(h.values()[i], 2);
  }
  double rt = std::sqrt(num / den);
  double l2 = trapezoid(linspace(0.0, 10.0, 20001), [](double x) { return std::pow(bump(x, 4.0, 2.5), 2); });
  double ratio = t.values.cwiseAbs2().dot(sm.mass) / l2;
  return {rt <= 1e-3 && ratio >= 0.99 && ratio <= 1.01, fmt("round trip %.3e, norm ratio %.6f", rt, ratio)};
}

Outcome c6() {
  const SpectralMeasure& sm = cosine_measure();
  auto g = linspace(0.0, 3.0, 13);
  double e = 0.0;
  for (double t : {0.25, 1.0}) {
    Eigen::MatrixXd p = heat_kernel_grid(t, g, g, sm);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j)
        e = std::max(e, std::fabs(p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - neumann_gauss(t, g[i], g[j])));
  }
  auto ys = linspace(0.0, sm.L, 8001);
  double md = 0.0;
  for (double t : {0.25, 1.0}) {
    Eigen::MatrixXd p = heat_kernel_grid(t, {1.0}, ys, sm);
    double mass = 0.0;
    for (Eigen::Index j = 0; j + 1 < p.cols(); ++j)
      mass += 0.5 * (ys[static_cast<std::size_t>(j) + 1] - ys[static_cast<std::size_t>(j)]) * (p(0, j) + p(0, j + 1));
    md = std::max(md, std::fabs(mass - 1.0));
  }
  return {e <= 1e-5 && md <= 1e-4, fmt("max err %.3e, mass defect %.3e", e, md)};
}

Outcome c7() {
  double res = 0.0, qmin = 1e300, md = 0.0;
  for (const SpectralMeasure* sm : {&cosine_measure(), &bessel_measure()}) {
    auto xi = linspace(sm->start(), sm->L, 1601);
    for (double t : {0.1, 0.5})
      for (auto [x, y] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}}) {
        for (double lam : {0.0, 1.0, 4.0}) res = std::max(res, product_formula_residual(lam, t, x, y, *sm));
        ProductKernel pk = product_density(t, x, y, xi, *sm);
        qmin = std::min(qmin, pk.min_value());
        md = std::max(md, std::fabs(pk.mass - 1.0));
      }
  }
  double spot = product_density(0.25, 1.0, 1.0, {0.0}, cosine_measure()).q(0);
  double se = std::fabs(spot - (1.0 + std::exp(-4.0)) / std::sqrt(kPi));
  bool ok = res <= 1e-4 && qmin >= -1e-8 && md <= 1e-4 && se <= 1e-6;
  return {ok, fmt("residual %.3e, min q %.3e, mass defect %.3e", res, qmin, md) + fmt(", spot err %.3e", se)};
}

Outcome c8() {
  MeasureApprox ma = approx_nu(1.0, 2.0, kDefaultTSchedule, cosine_measure());
  bool dec = true;
  for (std::size_t i = 1; i < ma.gaps.size(); ++i) dec = dec && ma.gaps[i] < ma.gaps[i - 1];
  double le = 0.0;
  for (std::size_t j = 0; j < ma.probe_lambdas.size(); ++j) {
    double s = std::sqrt(ma.probe_lambdas[j]);
    le = std::max(le, std::fabs(ma.limit_moments[j] - std::cos(s) * std::cos(2 * s)));
  }
  double last = ma.gaps.empty() ? 1e300 : ma.gaps.back();
  return {dec && last <= 1e-3 && le <= 1e-3, fmt("final gap %.3e, limit err %.3e, decreasing %.0f", last, le, dec)};
}

Outcome c9() {
  SupportReport a = classify_support(1.0, 2.0, certificate(builtin_operator("builtin:cosine")));
  bool ok_a = a.kcase == "a" && a.support.size() == 2 && std::fabs(a.support[0].first - 1.0) < 1e-12 &&
              std::fabs(a.support[1].first - 3.0) < 1e-12;
  const SpectralMeasure& sb = bessel_measure();
  SupportReport b = classify_support(1.0, 2.0, certificate(sb.kernel->op()));
  bool ok_b = b.support.size() == 1 && std::fabs(b.support[0].first - 1.0) < 1e-9 && std::fabs(b.support[0].second - 3.0) < 1e-9;
  const double t = 1e-3;
  auto xi = linspace(sb.start(), 8.0, 16001);
  ProductKernel pk = product_density(t, 1.0, 2.0, xi, sb);
  double lo = 1.0 - 3 * std::sqrt(t), hi = 3.0 + 3 * std::sqrt(t), out = 0.0;
  for (std::size_t i = 0; i + 1 < xi.size(); ++i) {
    double m = 0.5 * (xi[i] + xi[i + 1]);
    if (m >= lo && m <= hi) continue;
    auto I = static_cast<Eigen::Index>(i);
    out += 0.5 * (xi[i + 1] - xi[i]) * (std::fabs(pk.q(I)) * xi[i] * xi[i] + std::fabs(pk.q(I + 1)) * xi[i + 1] * xi[i + 1]);
  }
  const SpectralMeasure& sw = whittaker_measure();
  SupportReport w = classify_support(1.0, 2.0, certificate(sw.kernel->op()));
  auto xs = linspace(0.5, 3.0, 41);
  CauchySolution sol = solve_cauchy(bump_fn(0.5, 4.0, 2001, 2.0, 1.0), sw, xs, xs);
  PositivityReport pr = positivity_report(sol, true);
  bool ok_w = w.kcase == "degenerate_full" && pr.strict_positive_fraction == 1.0;
  return {ok_a && ok_b && out <= 0.02 && ok_w,
          fmt("bessel outside mass %.3e, strict fraction %.3f", out, pr.strict_positive_fraction) + ", cases " + a.kcase +
              "/" + b.kcase + "/" + w.kcase};
}

Outcome c10() {
  const SpectralMeasure& sm = cosine_measure();
  GridFunction h = bump_fn(0.0, 10.0, 2001, 4.0, 2.5);
  auto g = linspace(0.0, 6.0, 61);
  CauchySolution sol = solve_cauchy(h, sm, g, g);
  const double hmax = *std::max_element(h.values().begin(), h.values().end());
  double be = 0.0, asym = 0.0, fmin = 1e300, fmax = -1e300;
  for (Eigen::Index i = 0; i < sol.f.rows(); ++i) {
    be = std::max(be, std::fabs(sol.f(i, 0) - h(g[static_cast<std::size_t>(i)])));
    for (Eigen::Index j = 0; j < sol.f.cols(); ++j) {
      asym = std::max(asym, std::fabs(sol.f(i, j) - sol.f(j, i)));
      fmin = std::min(fmin, sol.f(i, j));
      fmax = std::max(fmax, sol.f(i, j));
    }
  }
  const double ref = sol.eval(2.0, 1.0);
  double prev = 0.0, worst = 1e300;
  for (double am : {0.1, 0.01, 0.001}) {
    double e = std::fabs(solve_cauchy_shifted(h, am, sm, {2.0}, {1.0}).f(0, 0) - ref);
    if (prev > 0.0) worst = std::min(worst, prev / e);
    prev = e;
  }
  bool ok = be <= 1e-3 && asym <= 1e-8 && fmin >= -1e-6 && fmax <= hmax + 1e-6 && worst >= 4.0;
  return {ok, fmt("boundary %.3e, asymmetry %.3e, min %.3e", be, asym, fmin) + fmt(", shifted ratio %.2f", worst)};
}

Outcome c11() {
  const SpectralMeasure& sc = cosine_measure();
  CauchySolution cs = solve_cauchy(bump_fn(0.0, 10.0, 2001, 4.0, 2.5), sc, linspace(0.0, 6.0, 61), linspace(0.0, 6.0, 61));
  double rc = triangle_identity_residual(cs, certificate(sc.kernel->op()), 0.5, 3.0, 1.5, 128).residual;
  const SpectralMeasure& sb = bessel_measure();
  MpCertificate cb = certificate(sb.kernel->op());
  CauchySolution bs = solve_cauchy(bump_fn(0.5, 6.0, 2201, 3.0, 2.0), sb, linspace(0.3, 4.8, 46), linspace(0.3, 2.0, 18));
  double prev = 0.0, worst = 1e300;
  for (int n : {32, 64, 128}) {
    double r = triangle_identity_residual(bs, cb, 0.5, 3.0, 1.5, n).residual;
    if (prev > 0.0) worst = std::min(worst, prev / r);
    prev = r;
  }
  return {rc <= 1e-4 && worst >= 1.5, fmt("cosine residual %.3e, bessel refinement ratio %.2f", rc, worst)};
}

Outcome c12() {
  double rec = 0.0, tr = 0.0;
  bool checks = true;
  for (const SpectralMeasure* sm : {&cosine_measure(), &bessel_measure()}) {
    GridFunction f = heat_kernel_slice(0.25, 1.0, *sm, linspace(sm->start(), sm->L, 4001));
    GridFunction h0 = bump_fn(sm->start(), 14.0, 2801, 4.0, 2.5);
    GridFunction hf = convolve_functions(h0, f, *sm, 1e-9, h0.grid());
    std::vector<double> v(h0.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = h0.values()[i] + hf.values()[i];
    EquationSolution sol = solve_qt_equation(0.25, 1.0, GridFunction(h0.grid(), v), *sm);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      num += std::fabs(sol.h.values()[i] - h0.values()[i]);
      den += std::fabs(h0.values()[i]);
    }
    rec = std::max(rec, num / den);
    tr = std::max(tr, sol.transform_residual);
    checks = checks && sol.check.ok;
  }
  const SpectralMeasure& sm = cosine_measure();
  GridFunction b = bump_fn(2.0, 4.0, 801, 3.0, 1.0);
  double I = transform_at(b, *sm.kernel, {cplx(sm.sigma2, 0.0)})[0].real();
  std::vector<double> bv(b.values());
  for (double& x : bv) x *= -2.0 / I;
  GridFunction bad(b.grid(), bv);
  WienerLevyReport r = wiener_levy_check(bad, SpectralStrip(sm.sigma2, sm.sigma2), 1.0, sm);
  double wm = std::fabs(1.0 + transform_at(bad, *sm.kernel, {r.witness})[0].real());
  bool ok = rec <= 1e-3 && tr <= 1e-4 && checks && !r.ok && wm <= 1e-6;
  return {ok, fmt("recovery %.3e, transform residual %.3e, witness |1+Ff| %.3e", rec, tr, wm)};
}

Outcome c13() {
  double triv = 0.0;
  for (const SpectralMeasure* sm : {&cosine_measure(), &bessel_measure()}) {
    GridFunction h = bump_fn(0.5, 3.5, 1201, 2.0, 1.5), g = bump_fn(1.0, 4.0, 1201, 2.5, 1.5);
    GridFunction hg = convolve_functions(h, g, *sm, 1e-9, linspace(sm->start(), 12.0, 6001));
    Eigen::VectorXd lhs = forward_transform(hg, *sm).values;
    Eigen::VectorXd rhs = forward_transform(h, *sm).values.cwiseProduct(forward_transform(g, *sm).values);
    triv = std::max(triv, (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff());
  }
  const SpectralMeasure& sm = bessel_measure();
  double sub = 0.0;
  GridFunction h = bump_fn(1.0, 3.0, 801, 2.0, 1.0), g = bump_fn(1.5, 2.5, 801, 2.0, 0.5);
  GridFunction hg = convolve_functions(h, g, sm, 1e-9, linspace(sm.start(), 12.0, 4801));
  for (double kappa : {0.0, -0.25}) {
    auto n = [&](const GridFunction& u) { return l1_kappa_norm(u, kappa, *sm.kernel, sm.sigma2); };
    sub = std::max(sub, n(hg) / (n(h) * n(g)));
  }
  DiscreteMeasure da{{sm.start()}, {1.0}}, mu{{0.5, 1.7}, {0.3, 0.7}};
  MeasureConvolution id = convolve_measures(da, mu, sm, 0.0);
  bool exact = (id.product - id.nu_hat).cwiseAbs().maxCoeff() == 0.0;
  return {triv <= 1e-4 && sub <= 1 + 1e-6 && exact,
          fmt("trivialization %.3e, norm ratio %.6f, identity exact %.0f", triv, sub, exact)};
}

Outcome c14() {
  std::ostringstream a, b, ea, eb;
  int ra = cli::run({"selftest"}, a, ea), rb = cli::run({"selftest"}, b, eb);
  bool same = a.str() == b.str() && !a.str().empty();
  return {ra == 0 && rb == 0 && same, fmt("exit codes %.0f/%.0f, bytes %.0f", ra, rb, static_cast<double>(a.str().size())) +
                                          (same ? ", identical" : ", differ")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"kernel oracle cosine", c1},       {"kernel oracle bessel", c2},       {"kernel boundedness", c3},
      {"spectral measure cosine", c4},    {"parseval round trip", c5},        {"heat kernel cosine", c6},
      {"product formula", c7},            {"weak limit", c8},                 {"support classification", c9},
      {"cauchy problem", c10},            {"triangle identity", c11},         {"wiener-levy solver", c12},
      {"algebra properties", c13},        {"selftest determinism", c14},
  };
  int failed = 0, i = 0;
  for (const auto& [name, fn] : criteria) {
    ++i;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %-26s %s  %s\n", i, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", i - failed, i);
  return failed == 0 ? 0 : 1;
}
