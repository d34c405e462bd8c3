#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "cli.hpp"
#include "slhyper/cauchy.hpp"
#include "slhyper/hconv.hpp"
#include "slhyper/inteq.hpp"
#include "slhyper/kernel.hpp"
#include "slhyper/operator_model.hpp"
#include "slhyper/spectral.hpp"

namespace slhyper::cli {
namespace {

class Report {
 public:
  Report(std::ostream& os, int precision) : os_(os), prec_(std::min(precision, 6)) {}

  // pass iff value <= bound (or >= bound when at_least)
  void check(const std::string& name, double value, double bound, bool at_least = false) {
    bool ok = std::isfinite(value) && (at_least ? value >= bound : value <= bound);
    line(name, value, bound, at_least ? ">=" : "<=", ok);
  }
  void flag(const std::string& name, bool ok) { line(name, ok ? 1.0 : 0.0, 1.0, "==", ok); }
  void fail(const std::string& name, const std::string& what) {
    ++total_;
    os_ << name << " FAIL (" << what << ")\n";
  }
  bool all() const { return passed_ == total_; }
  void summary() { os_ << "summary " << passed_ << "/" << total_ << " passed\n"; }

 private:
  void line(const std::string& name, double value, double bound, const char* rel, bool ok) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-28s %.*e %s %.*e %s\n", name.c_str(), prec_, value, rel, prec_, bound,
                  ok ? "PASS" : "FAIL");
    os_ << buf;
    ++total_;
    passed_ += ok ? 1 : 0;
  }
  std::ostream& os_;
  int prec_;
  int total_ = 0, passed_ = 0;
};

double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(g() >> 11) * 0x1p-53;
}

double neumann_gauss(double t, double x, double y) {
  return (std::exp(-(x - y) * (x - y) / (4 * t)) + std::exp(-(x + y) * (x + y) / (4 * t))) /
         (2 * std::sqrt(std::numbers::pi * t));
}

}  // namespace

bool selftest(std::ostream& out, int precision) {
  Report rep(out, precision);
  const OperatorSpec cos_op = builtin_operator("builtin:cosine");
  const OperatorSpec bes_op = builtin_operator("builtin:bessel?alpha=0.5");
  auto kc = std::make_shared<Kernel>(cos_op);
  auto kb = std::make_shared<Kernel>(bes_op);

  try {
    double ec = 0.0, eb = 0.0;
    for (double lam : {0.0, 1.0, 4.0, 10.0})
      for (double x : linspace(0.0, 5.0, 51)) {
        double s = std::sqrt(lam);
        ec = std::max(ec, std::fabs(kc->w(lam, x) - std::cos(x * s)));
        double ref = x * s == 0.0 ? 1.0 : std::sin(x * s) / (x * s);
        eb = std::max(eb, std::fabs(kb->w(lam, x) - ref));
      }
    rep.check("kernel_cosine", ec, 1e-8);
    rep.check("kernel_bessel", eb, 1e-7);

    std::mt19937_64 gen(20240607);
    double wmax = 0.0;
    for (int i = 0; i < 200; ++i) {
      double lam = uniform(gen, 0.0, 50.0), x = uniform(gen, 0.0, 10.0);
      wmax = std::max({wmax, std::fabs(kc->w(lam, x)), std::fabs(kb->w(lam, x))});
    }
    rep.check("kernel_bound", wmax, 1.0 + 1e-9);
  } catch (const std::exception& e) {
    rep.fail("kernel", e.what());
  }

  try {
    SpectralMeasure sm = build_spectral_measure(kc, 40.0, 2048);
    double ce = 0.0;
    for (double L : {1.0, 4.0, 16.0}) ce = std::max(ce, std::fabs(sm.cumulative(L) - 2 * std::sqrt(L) / std::numbers::pi));
    rep.check("spectral_cumulative", ce, 0.02);
    rep.check("spectral_smallest_atom", sm.lambda.minCoeff(), -0.05, true);

    GridFunction h = GridFunction::sample(linspace(0.0, 10.0, 2001), [](double x) { return bump(x, 4, 2.5); });
    TransformTable fh = forward_transform(h, sm);
    GridFunction back = inverse_transform(fh, sm, h.grid());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      num += std::pow(back.values()[i] - h.values()[i], 2);
      den += h.values()[i] * h.values()[i];
    }
    rep.check("parseval_roundtrip", std::sqrt(num / den), 1e-3);
    double l2 = h.integrate([&](double x) { return h(x); });
    double spec = fh.values.cwiseAbs2().dot(sm.mass);
    rep.check("parseval_norm_ratio", std::fabs(spec / l2 - 1.0), 0.01);

    double he = 0.0;
    auto g = linspace(0.0, 3.0, 7);
    for (double t : {0.25, 1.0}) {
      Eigen::MatrixXd p = heat_kernel_grid(t, g, g, sm);
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j)
          he = std::max(he, std::fabs(p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                      neumann_gauss(t, g[i], g[j])));
    }
    rep.check("heat_kernel_closed_form", he, 1e-5);
    GridFunction slice = heat_kernel_slice(0.25, 1.0, sm, linspace(0.0, 40.0, 8001));
    rep.check("heat_kernel_mass", std::fabs(slice.integrate() - 1.0), 1e-4);

    double pr = 0.0;
    for (double lam : {0.0, 1.0, 4.0})
      for (double t : {0.1, 0.5})
        for (auto [x, y] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}})
          pr = std::max(pr, product_formula_residual(lam, t, x, y, sm));
    rep.check("product_formula", pr, 1e-4);
    ProductKernel pk = product_density(0.25, 1.0, 1.0, {0.0}, sm);
    rep.check("product_closed_form", std::fabs(pk.q(0) - (1 + std::exp(-4.0)) / std::sqrt(std::numbers::pi)), 1e-6);

    MpCertificate cert = certify_mp(StandardForm(cos_op, cos_op.c));
    rep.flag("mp_certified_cosine", cert.checks.all());
    SupportReport sr = classify_support(1.0, 2.0, cert);
    bool atoms_ok = sr.kcase == "a" && sr.atoms.size() == 2 && std::fabs(sr.atoms[0] - 1.0) < 1e-9 &&
                    std::fabs(sr.atoms[1] - 3.0) < 1e-9;
    rep.flag("support_cosine_case_a", atoms_ok);

    GridFunction hb = GridFunction::sample(linspace(0.0, 10.0, 2001), [](double x) { return bump(x, 4, 2.5); });
    hb.check_admissible();
    auto xs = linspace(0.0, 6.0, 31);
    CauchySolution sol = solve_cauchy(hb, sm, xs, xs);
    double bd = 0.0, sym = 0.0;
    for (Eigen::Index i = 0; i < sol.f.rows(); ++i) {
      bd = std::max(bd, std::fabs(sol.f(i, 0) - hb(xs[static_cast<std::size_t>(i)])));
      for (Eigen::Index j = 0; j < sol.f.cols(); ++j) sym = std::max(sym, std::fabs(sol.f(i, j) - sol.f(j, i)));
    }
    rep.check("cauchy_boundary", bd, 1e-3);
    rep.check("cauchy_symmetry", sym, 1e-8);
    rep.check("cauchy_positivity", sol.f.minCoeff(), -1e-6, true);

    GridFunction grid_h = GridFunction::sample(linspace(0.0, 14.0, 2801), [](double x) { return bump(x, 4, 2.5); });
    GridFunction f = heat_kernel_slice(0.25, 1.0, sm, linspace(0.0, 40.0, 4001));
    GridFunction hf = convolve_functions(grid_h, f, sm, 1e-9, grid_h.grid());
    std::vector<double> pv(grid_h.size());
    for (std::size_t i = 0; i < pv.size(); ++i) pv[i] = grid_h.values()[i] + hf.values()[i];
    EquationSolution es = solve_qt_equation(0.25, 1.0, GridFunction(grid_h.grid(), pv), sm);
    double n1 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i + 1 < pv.size(); ++i) {
      n1 += std::fabs(es.h.values()[i] - grid_h.values()[i]);
      d1 += std::fabs(grid_h.values()[i]);
    }
    rep.check("inteq_recovery", n1 / d1, 1e-3);
    rep.check("inteq_transform_residual", es.transform_residual, 1e-4);
  } catch (const std::exception& e) {
    rep.fail("cosine_suite", e.what());
  }
  rep.summary();
  return rep.all();
}

}  // namespace slhyper::cli
