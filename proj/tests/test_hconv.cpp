#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "slhyper/errors.hpp"
#include "slhyper/hconv.hpp"
#include "slhyper/inteq.hpp"

using namespace slhyper;
using namespace slhyper::testing;

namespace {

// Cosine case: q_t(x, y, xi) is a sum of four Gaussians.
double cosine_q(double t, double x, double y, double xi) {
  double s = 0.0;
  for (double v : {x + y + xi, x + y - xi, x - y + xi, x - y - xi}) s += std::exp(-v * v / (4 * t));
  return s / (4 * std::sqrt(kPi * t));
}

double l1(const GridFunction& h, const SpectralMeasure& sm, double kappa = 0.0) {
  return l1_kappa_norm(h, kappa, *sm.kernel, sm.sigma2);
}

}  // namespace

TEST(ProductDensity, CosineClosedForm) {
  const SpectralMeasure& sm = cosine_measure();
  ProductKernel pk = product_density(0.25, 1.0, 1.0, {0.0}, sm);
  EXPECT_NEAR(pk.q(0), (1.0 + std::exp(-4.0)) / std::sqrt(kPi), 1e-6);
  auto xi = linspace(0.0, 6.0, 25);
  for (double t : {0.1, 0.5})
    for (auto [x, y] : {std::pair{1.0, 2.0}, {0.5, 0.5}, {2.0, 3.0}}) {
      ProductKernel p = product_density(t, x, y, xi, sm);
      for (std::size_t i = 0; i < xi.size(); ++i) EXPECT_NEAR(p.q(static_cast<Eigen::Index>(i)), cosine_q(t, x, y, xi[i]), 1e-6);
    }
}

TEST(ProductDensity, MassNonnegativityAndSymmetry) {
  for (const SpectralMeasure* sm : {&cosine_measure(), &bessel_measure()}) {
    auto xi = linspace(sm->start(), sm->L, 1601);
    ProductKernel a = product_density(0.25, 1.0, 2.0, xi, *sm);
    ProductKernel b = product_density(0.25, 2.0, 1.0, xi, *sm);
    EXPECT_NEAR(a.mass, 1.0, 1e-4);
    EXPECT_FALSE(a.mass_warning);
    EXPECT_GE(a.min_value(), -1e-8);
    for (Eigen::Index i = 0; i < a.q.size(); ++i) EXPECT_NEAR(a.q(i), b.q(i), 1e-10);
  }
}

TEST(ProductDensity, PermutationSymmetry) {
  const SpectralMeasure& sm = bessel_measure();
  const double t = 0.2;
  std::vector<double> pts{0.7, 1.3, 2.2};
  for (double x : pts)
    for (double y : pts)
      for (double z : pts) {
        double q1 = product_density(t, x, y, {z}, sm).q(0);
        double q2 = product_density(t, x, z, {y}, sm).q(0);
        double q3 = product_density(t, z, y, {x}, sm).q(0);
        EXPECT_NEAR(q1, q2, 1e-8);
        EXPECT_NEAR(q1, q3, 1e-8);
      }
}

TEST(ProductFormula, Residuals) {
  EXPECT_LE(product_formula_residual(1.0, 0.5, 1.0, 2.0, cosine_measure()), 1e-5);
  EXPECT_LE(product_formula_residual(2.0, 0.5, 1.0, 1.0, bessel_measure()), 1e-4);
}

TEST(ProductFormula, LambdaZeroIsMassDefect) {
  const SpectralMeasure& sm = cosine_measure();
  ProductKernel pk = product_density(0.1, 1.0, 2.0, linspace(0.0, sm.L, 8001), sm);
  EXPECT_NEAR(product_formula_residual(0.0, 0.1, 1.0, 2.0, sm), std::fabs(1.0 - pk.mass), 1e-7);
}

TEST(ApproxNu, CosineWeakLimit) {
  const SpectralMeasure& sm = cosine_measure();
  MeasureApprox ma = approx_nu(1.0, 2.0, kDefaultTSchedule, sm);
  ASSERT_EQ(ma.gaps.size(), kDefaultTSchedule.size() - 1);
  for (std::size_t i = 1; i < ma.gaps.size(); ++i) EXPECT_LT(ma.gaps[i], ma.gaps[i - 1]);
  EXPECT_LE(ma.gaps.back(), 1e-3);
  for (std::size_t j = 0; j < ma.probe_lambdas.size(); ++j) {
    double s = std::sqrt(ma.probe_lambdas[j]);
    EXPECT_NEAR(ma.limit_moments[j], std::cos(s) * std::cos(2 * s), 1e-3);
  }
  EXPECT_NEAR(ma.mass, 1.0, 1e-3);
}

TEST(ApproxNu, LeftEndpointIsExactAtom) {
  MeasureApprox ma = approx_nu(0.0, 2.0, kDefaultTSchedule, cosine_measure());
  EXPECT_EQ(ma.t_used, 0.0);
  ASSERT_EQ(ma.atoms.size(), 1u);
  EXPECT_EQ(ma.atoms[0], 2.0);
  EXPECT_EQ(ma.atom_weights[0], 1.0);
}

TEST(ApproxNu, RejectsIncreasingSchedule) {
  EXPECT_THROW(approx_nu(1.0, 2.0, {0.01, 0.1}, cosine_measure()), DomainError);
}

TEST(Support, CosineTwoAtoms) {
  SupportReport r = classify_support(1.0, 2.0, certificate(builtin_operator("builtin:cosine")));
  EXPECT_EQ(r.kcase, "a");
  ASSERT_EQ(r.support.size(), 2u);
  EXPECT_NEAR(r.support[0].first, 1.0, 1e-12);
  EXPECT_NEAR(r.support[1].first, 3.0, 1e-12);
  ASSERT_EQ(r.weights.size(), 2u);
  EXPECT_NEAR(r.weights[0], 0.5, 1e-12);
  EXPECT_NEAR(r.weights[1], 0.5, 1e-12);
}

TEST(Support, BesselInterval) {
  SupportReport r = classify_support(1.0, 2.0, certificate(builtin_operator("builtin:bessel?alpha=0.5")));
  EXPECT_EQ(r.kcase, "extrapolated_e");
  ASSERT_EQ(r.support.size(), 1u);
  EXPECT_NEAR(r.support[0].first, 1.0, 1e-9);
  EXPECT_NEAR(r.support[0].second, 3.0, 1e-9);
  EXPECT_FALSE(r.atomic);
}

TEST(Support, BesselProductMassConcentrates) {
  const SpectralMeasure& sm = bessel_measure();
  auto xi = linspace(sm.start(), 8.0, 16001);
  double prev = 1e300;
  for (double t : {1e-2, 1e-3}) {
    ProductKernel pk = product_density(t, 1.0, 2.0, xi, sm);
    double lo = 1.0 - 3 * std::sqrt(t), hi = 3.0 + 3 * std::sqrt(t), out = 0.0;
    for (std::size_t i = 0; i + 1 < xi.size(); ++i) {
      double m = 0.5 * (xi[i] + xi[i + 1]);
      if (m >= lo && m <= hi) continue;
      auto I = static_cast<Eigen::Index>(i);
      out += 0.5 * (xi[i + 1] - xi[i]) * (std::fabs(pk.q(I)) * xi[i] * xi[i] + std::fabs(pk.q(I + 1)) * xi[i + 1] * xi[i + 1]);
    }
    EXPECT_LE(out, 0.02) << "t = " << t;
    EXPECT_LT(out, prev);
    prev = out;
  }
}

TEST(Support, DegenerateFull) {
  SupportReport r = classify_support(1.0, 2.0, certificate(builtin_operator("builtin:whittaker?alpha=0.25&kappa=1")));
  EXPECT_EQ(r.kcase, "degenerate_full");
  ASSERT_EQ(r.support.size(), 1u);
  EXPECT_EQ(r.support[0].first, 0.0);
  EXPECT_TRUE(std::isinf(r.support[0].second));
}

TEST(Support, NeedsCertificate) {
  auto op = operator_from_json(R"j({"name": "gauss", "standard_form": {"A": "1+x^3", "gamma_a": 0}})j");
  EXPECT_THROW(classify_support(1.0, 2.0, certificate(op)), DomainError);
}

TEST(Translate, CosineAtomicLimit) {
  const SpectralMeasure& sm = cosine_measure();
  GridFunction h = bump_fn(0.0, 10.0, 2001, 4.0, 2.0);
  auto grid = linspace(0.0, 8.0, 81);
  const double y = 1.5;
  auto oracle = [&](double x) { return 0.5 * (bump(std::fabs(x - y), 4.0, 2.0) + bump(x + y, 4.0, 2.0)); };
  GridFunction reg = translate(h, y, sm, 1e-5, grid);
  MpCertificate cert = certificate(sm.kernel->op());
  GridFunction exact = translate(h, y, sm, 0.0, grid, &cert);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(reg.values()[i], oracle(grid[i]), 2e-3);
    EXPECT_NEAR(exact.values()[i], oracle(grid[i]), 1e-12);
  }
}

TEST(Translate, ZeroShiftIsIdentity) {
  GridFunction h = bump_fn(0.0, 10.0, 2001, 4.0, 2.0);
  GridFunction t = translate(h, 0.0, cosine_measure(), 1e-3, h.grid());
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ(t.values()[i], h.values()[i]);
}

TEST(Translate, ExactModeNeedsAtomicCase) {
  const SpectralMeasure& sm = bessel_measure();
  GridFunction h = bump_fn(0.5, 3.5, 601, 2.0, 1.5);
  MpCertificate cert = certificate(sm.kernel->op());
  EXPECT_THROW(translate(h, 1.0, sm, 0.0, h.grid(), &cert), DomainError);
  EXPECT_THROW(translate(h, 1.0, sm, 0.0, h.grid()), DomainError);
}

TEST(Translate, NormBound) {
  const SpectralMeasure& sm = bessel_measure();
  GridFunction h = bump_fn(0.5, 3.5, 1201, 2.0, 1.5);
  for (double y : {0.5, 1.0, 3.0}) {
    GridFunction t = translate(h, y, sm, 1e-3, linspace(sm.start(), 12.0, 4801));
    EXPECT_LE(l1(t, sm), l1(h, sm) * (1 + 1e-6)) << "y = " << y;
  }
}

TEST(Convolve, Trivialization) {
  for (const SpectralMeasure* sm : {&cosine_measure(), &bessel_measure()}) {
    GridFunction h = bump_fn(0.5, 3.5, 1201, 2.0, 1.5), g = bump_fn(1.0, 4.0, 1201, 2.5, 1.5);
    GridFunction hg = convolve_functions(h, g, *sm, 1e-9, linspace(sm->start(), 12.0, 6001));
    Eigen::VectorXd lhs = forward_transform(hg, *sm).values;
    Eigen::VectorXd rhs = forward_transform(h, *sm).values.cwiseProduct(forward_transform(g, *sm).values);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-4 * rhs.cwiseAbs().maxCoeff());
  }
}

TEST(Convolve, CosineMatchesSymmetrizedClassical) {
  const SpectralMeasure& sm = cosine_measure();
  GridFunction h = bump_fn(0.0, 10.0, 2001, 4.0, 2.0), g = bump_fn(0.0, 4.0, 801, 2.0, 1.0);
  GridFunction hg = convolve_functions(h, g, sm, 1e-7, linspace(0.0, 9.0, 19));
  auto ys = linspace(0.0, 4.0, 40001);
  for (std::size_t i = 0; i < hg.size(); ++i) {
    double x = hg.grid()[i];
    double direct = trapezoid(ys, [&](double y) {
      return 0.5 * (bump(std::fabs(x - y), 4.0, 2.0) + bump(x + y, 4.0, 2.0)) * bump(y, 2.0, 1.0);
    });
    EXPECT_NEAR(hg.values()[i], direct, 1e-5) << "x = " << x;
  }
}

TEST(Convolve, Submultiplicative) {
  const SpectralMeasure& sm = bessel_measure();
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> C(1.0, 3.0), W(0.3, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    double c1 = C(gen), w1 = W(gen), c2 = C(gen), w2 = W(gen);
    GridFunction h = bump_fn(c1 - w1, c1 + w1, 801, c1, w1), g = bump_fn(c2 - w2, c2 + w2, 801, c2, w2);
    GridFunction hg = convolve_functions(h, g, sm, 1e-9, linspace(sm.start(), 12.0, 4801));
    for (double kappa : {0.0, -0.25})
      EXPECT_LE(l1(hg, sm, kappa), (1 + 1e-6) * l1(h, sm, kappa) * l1(g, sm, kappa)) << trial << " " << kappa;
  }
}

TEST(ConvolveMeasures, IdentityProductAssociativity) {
  const SpectralMeasure& sm = bessel_measure();
  DiscreteMeasure da{{0.0}, {1.0}}, mu{{0.5, 1.7}, {0.3, 0.7}}, dx{{1.0}, {1.0}}, dy{{2.0}, {1.0}}, pi{{2.5}, {1.0}};
  MeasureConvolution id = convolve_measures(da, mu, sm, 0.0);
  for (Eigen::Index k = 0; k < id.product.size(); ++k) EXPECT_EQ(id.product(k), id.nu_hat(k));
  MeasureConvolution xy = convolve_measures(dx, dy, sm, 1e-3);
  Eigen::VectorXd wx = sm.w_at(1.0), wy = sm.w_at(2.0);
  for (Eigen::Index k = 0; k < xy.product.size(); ++k) EXPECT_NEAR(xy.product(k), wx(k) * wy(k), 1e-15);
  Eigen::VectorXd a = measure_transform(mu, sm), b = measure_transform(dx, sm), c = measure_transform(pi, sm);
  Eigen::VectorXd left = a.cwiseProduct(b).cwiseProduct(c), right = a.cwiseProduct(b.cwiseProduct(c));
  EXPECT_LE((left - right).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_FALSE(xy.density.size() == 0);
}
