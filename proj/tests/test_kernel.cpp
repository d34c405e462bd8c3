#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <random>

#include "common.hpp"
#include "slhyper/errors.hpp"
#include "slhyper/kernel.hpp"

using namespace slhyper;
using namespace slhyper::testing;

namespace {

const Kernel& cosine_kernel() {
  static const Kernel k(builtin_operator("builtin:cosine"));
  return k;
}
const Kernel& bessel_kernel() {
  static const Kernel k(builtin_operator("builtin:bessel?alpha=0.5"));
  return k;
}

}  // namespace

TEST(Kernel, LambdaZeroIsOne) {
  for (const Kernel* k : {&cosine_kernel(), &bessel_kernel()})
    for (double x : {0.0, 0.5, 3.0, 17.0}) {
      KernelValue v = k->eval_w(0.0, x);
      EXPECT_EQ(v.w, cplx(1.0, 0.0));
      EXPECT_EQ(v.w1, cplx(0.0, 0.0));
    }
}

TEST(Kernel, CosineClosedForm) {
  EXPECT_NEAR(cosine_kernel().w(4.0, kPi / 2), -1.0, 1e-10);
  EXPECT_NEAR(cosine_kernel().w(-1.0, 2.0), std::cosh(2.0), 1e-9);
  for (double lam : {0.0, 1.0, 4.0, 10.0})
    for (double x : linspace(0.0, 5.0, 51)) EXPECT_NEAR(cosine_kernel().w(lam, x), std::cos(x * std::sqrt(lam)), 1e-8);
}

TEST(Kernel, CosineQuasiDerivative) {
  for (double lam : {1.0, 9.0})
    for (double x : {0.3, 2.0, 4.5}) {
      KernelValue v = cosine_kernel().eval_w(lam, x);
      EXPECT_NEAR(v.w1.real(), -std::sqrt(lam) * std::sin(x * std::sqrt(lam)), 1e-8);
    }
}

TEST(Kernel, CosineComplexLambda) {
  for (cplx lam : {cplx(2.0, 1.0), cplx(-1.0, 3.0), cplx(25.0, -0.5)})
    for (double x : {0.5, 1.0, 3.0}) {
      cplx exact = std::cos(x * std::sqrt(lam));
      EXPECT_LE(std::abs(cosine_kernel().eval_w(lam, x).w - exact), 1e-8 * std::max(1.0, std::abs(exact)));
    }
}

TEST(Kernel, BesselHalfClosedForm) {
  EXPECT_NEAR(bessel_kernel().w(1.0, kPi), 0.0, 1e-10);
  for (double lam : {0.0, 1.0, 4.0, 10.0})
    for (double x : linspace(0.0, 5.0, 51)) EXPECT_NEAR(bessel_kernel().w(lam, x), sinc_kernel(lam, x), 1e-7);
}

TEST(Kernel, BoundedOnNonnegativeLambda) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> L(0.0, 60.0), X(0.0, 12.0);
  for (int i = 0; i < 200; ++i) {
    double lam = L(gen), x = X(gen);
    EXPECT_LE(std::fabs(cosine_kernel().w(lam, x)), 1.0 + 1e-9);
    EXPECT_LE(std::fabs(bessel_kernel().w(lam, x)), 1.0 + 1e-9);
  }
}

TEST(Kernel, LimitAtLeftEndpoint) {
  for (double x : {1e-2, 1e-4, 1e-6}) {
    KernelValue v = bessel_kernel().eval_w(5.0, x);
    EXPECT_NEAR(v.w.real(), 1.0, 5.0 * x * x + v.est_error + 1e-12);
    EXPECT_NEAR(v.w1.real(), 0.0, 5.0 * x * x * x + v.est_error + 1e-12);
  }
}

TEST(Kernel, VolterraResidual) {
  // w(x) = 1 - lambda int_a^x w(xi) r(xi) (int_xi^x dy / p(y)) dxi
  using boost::math::quadrature::gauss;
  const double lam = 3.0;
  for (double x : {0.7, 2.0, 4.0}) {
    auto wc = [&](double xi) { return cosine_kernel().w(lam, xi) * (x - xi); };
    double rc = 1.0 - lam * gauss<double, 30>::integrate(wc, 0.0, x);
    KernelValue vc = cosine_kernel().eval_w(lam, x);
    EXPECT_LE(std::fabs(vc.w.real() - rc), 10 * vc.est_error + 1e-13);
    // p = r = x^2: int_xi^x dy/y^2 = 1/xi - 1/x
    auto wb = [&](double xi) { return bessel_kernel().w(lam, xi) * xi * xi * (1.0 / xi - 1.0 / x); };
    double rb = 1.0 - lam * gauss<double, 30>::integrate(wb, 0.0, x);
    KernelValue vb = bessel_kernel().eval_w(lam, x);
    EXPECT_LE(std::fabs(vb.w.real() - rb), 10 * vb.est_error + 1e-13);
  }
}

TEST(KernelShifted, CosineTranslationInvariance) {
  EXPECT_NEAR(cosine_kernel().eval_w_shifted(1.0, 0.5, 1.5).w.real(), std::cos(1.0), 1e-10);
  EXPECT_EQ(cosine_kernel().eval_w_shifted(0.0, 0.7, 3.0).w, cplx(1.0, 0.0));
}

TEST(KernelShifted, BesselConvergesAsOriginShrinks) {
  double exact = bessel_kernel().w(1.0, 2.0), prev = 1e300;
  for (double am : {0.1, 0.01, 0.001}) {
    double e = std::fabs(bessel_kernel().eval_w_shifted(1.0, am, 2.0).w.real() - exact);
    EXPECT_LT(e, prev);
    prev = e;
  }
}

TEST(KappaShift, ZeroIsIdentity) {
  auto base = std::make_shared<const Kernel>(builtin_operator("builtin:cosine"));
  auto ks = kappa_shift(base, 0.0, 0.0, 10.0);
  for (double x : {0.5, 2.0, 7.0}) {
    EXPECT_NEAR(ks.w_kappa(x), 1.0, 1e-12);
    EXPECT_NEAR(ks.modified().p(x), 1.0, 1e-12);
  }
}

TEST(KappaShift, CosineMinusOne) {
  auto base = std::make_shared<const Kernel>(builtin_operator("builtin:cosine"));
  auto ks = kappa_shift(base, -1.0, 0.0, 10.0);
  for (double x : {0.5, 2.0, 5.0}) {
    EXPECT_NEAR(ks.w_kappa(x), std::cosh(x), 1e-9 * std::cosh(x));
    EXPECT_NEAR(ks.modified().p(x), std::cosh(x) * std::cosh(x), 1e-8 * std::cosh(x) * std::cosh(x));
  }
  for (double lam : {0.5, 2.0, 6.0})
    for (double x : {0.5, 2.0, 5.0}) {
      cplx lhs = ks.w_mod(lam, x) * ks.w_kappa(x);
      double rhs = std::cos(x * std::sqrt(cplx(lam - 1.0))).real();
      EXPECT_LE(std::abs(lhs - rhs), 1e-8 * std::max(1.0, std::fabs(rhs)));
    }
  EXPECT_THROW(kappa_shift(base, 0.5, 0.0, 10.0), DomainError);
}

TEST(KappaShift, SpectralMeasureShifts) {
  // Dirichlet atoms of the modified operator are those of the base shifted by -kappa, masses unchanged.
  auto base = std::make_shared<const Kernel>(builtin_operator("builtin:cosine"));
  const double kappa = -1.0, L = 6.0;
  auto ks = kappa_shift(base, kappa, 0.0, L + 1.0);
  SpectralMeasure sb = build_spectral_measure(base, L, 96);
  SpectralMeasure sk = build_spectral_measure(std::make_shared<const Kernel>(ks.modified()), L, 96);
  for (Eigen::Index k = 0; k < 30; ++k) {
    EXPECT_NEAR(sk.lambda(k), sb.lambda(k) - kappa, 1e-6 * std::max(1.0, sb.lambda(k)));
    EXPECT_NEAR(sk.mass(k), sb.mass(k), 1e-6 * sb.mass(k));
  }
}

TEST(Bochner, CosineAtOne) {
  BochnerReport r = bochner_check(cosine_kernel(), 0.0, 1.0, 20.0, 64);
  EXPECT_GE(r.min_eigenvalue, -1e-12);
  EXPECT_TRUE(r.bound_ok);
  EXPECT_LE(r.samples.front(), 1.0 + 1e-12);
}

TEST(Bochner, BesselSincIsPositiveDefinite) {
  BochnerReport r = bochner_check(bessel_kernel(), 0.0, 2.0, 20.0, 64);
  EXPECT_GE(r.min_eigenvalue, -1e-10);
  EXPECT_TRUE(r.bound_ok);
  // g(tau) = w_{tau^2}(2) = sin(2 tau) / (2 tau)
  for (std::size_t j = 1; j < r.samples.size(); ++j) {
    double tau = 20.0 * static_cast<double>(j) / static_cast<double>(r.samples.size() - 1);
    EXPECT_NEAR(r.samples[j], std::sin(2 * tau) / (2 * tau), 1e-7);
  }
}
