#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "slhyper/errors.hpp"
#include "slhyper/spectral.hpp"

using namespace slhyper;
using namespace slhyper::testing;

TEST(SpectralMeasure, CosineAtomsAndMasses) {
  const SpectralMeasure& sm = cosine_measure();
  const double L = sm.L;
  for (Eigen::Index k = 0; k < 400; ++k) {
    double lam = std::pow((static_cast<double>(k) + 0.5) * kPi / L, 2);
    EXPECT_NEAR(sm.lambda(k), lam, 1e-10 * std::max(1.0, lam)) << k;
    EXPECT_NEAR(sm.mass(k), 2.0 / L, 1e-10) << k;
  }
}

TEST(SpectralMeasure, CosineCumulative) {
  const SpectralMeasure& sm = cosine_measure();
  for (double Lam : {1.0, 4.0, 16.0}) EXPECT_NEAR(sm.cumulative(Lam), 2.0 * std::sqrt(Lam) / kPi, 0.02);
  EXPECT_GE(sm.lambda.minCoeff(), sm.sigma2 - 0.05);
}

TEST(SpectralMeasure, BesselHalfAtomsAndCumulative) {
  // Dirichlet zeros of sin(kL): lambda_n = (n pi / L)^2 with mass 2 lambda_n / L;
  // the Plancherel density is sqrt(lambda) / pi, so rho[0, Lam] = 2 Lam^{3/2} / (3 pi).
  const SpectralMeasure& sm = bessel_measure();
  for (Eigen::Index k = 0; k < 300; ++k) {
    double lam = std::pow((static_cast<double>(k) + 1.0) * kPi / sm.L, 2);
    EXPECT_NEAR(sm.lambda(k), lam, 1e-9 * std::max(1.0, lam)) << k;
    EXPECT_NEAR(sm.mass(k), 2.0 * lam / sm.L, 1e-8 * lam) << k;
  }
  for (double Lam : {1.0, 4.0, 16.0}) {
    double exact = 2.0 * std::pow(Lam, 1.5) / (3.0 * kPi);
    EXPECT_NEAR(sm.cumulative(Lam), exact, 0.02 * exact);
  }
}

TEST(SpectralMeasure, Invariants) {
  for (const SpectralMeasure* sm : {&cosine_measure(), &bessel_measure(), &whittaker_measure()}) {
    EXPECT_GE(sm->lambda.minCoeff(), sm->sigma2 - 1e-6);
    EXPECT_GT(sm->mass.minCoeff(), 0.0);
    double prev = 0.0;
    for (double Lam = sm->sigma2; Lam < sm->sigma2 + 50.0; Lam += 0.37) {
      double c = sm->cumulative(Lam);
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(SpectralMeasure, WhittakerBottomApproachesSigma) {
  // Liouville length grows like log L, so the lowest atom sinks toward sigma^2 slowly.
  const SpectralMeasure& sm = whittaker_measure();
  EXPECT_NEAR(sm.sigma2, 0.0625, 1e-8);
  SpectralMeasure wide = build_spectral_measure(sm.kernel, 4000.0, 1024);
  EXPECT_GE(sm.lambda.minCoeff(), sm.sigma2);
  EXPECT_GE(wide.lambda.minCoeff(), sm.sigma2);
  EXPECT_LT(wide.lambda.minCoeff(), sm.lambda.minCoeff());
}

TEST(Transform, IndicatorAtFour) {
  const Kernel& k = *cosine_measure().kernel;
  GridFunction one(linspace(0.0, 1.0, 401), std::vector<double>(401, 1.0));
  EXPECT_NEAR(transform_at(one, k, {cplx(4.0, 0.0)})[0].real(), std::sin(2.0) / 2.0, 1e-10);
}

TEST(Transform, GaussianCosineIntegral) {
  const SpectralMeasure& sm = cosine_measure();
  GridFunction g = GridFunction::sample(linspace(0.0, 12.0, 4801), [](double x) { return std::exp(-x * x / 2); });
  constexpr double kSqrtHalfPi = 1.2533141373155003;
  EXPECT_NEAR(transform_at(g, *sm.kernel, {cplx(0.0, 0.0)})[0].real(), kSqrtHalfPi, 1e-9);
  TransformTable t = forward_transform(g, sm);
  for (std::size_t k = 0; k < t.lambdas.size(); k += 7)
    EXPECT_NEAR(t.values(static_cast<Eigen::Index>(k)), kSqrtHalfPi * std::exp(-t.lambdas[k] / 2), 1e-8);
  EXPECT_NEAR(t.source_norm * t.source_norm, std::sqrt(kPi) / 2, 1e-8);
}

TEST(Transform, ZeroLambdaIsIntegral) {
  const SpectralMeasure& sm = bessel_measure();
  GridFunction h = bump_fn(0.5, 3.5, 30001, 2.0, 1.5);
  auto xs = linspace(0.5, 3.5, 200001);
  double direct = trapezoid(xs, [&](double x) { return bump(x, 2.0, 1.5) * x * x; });
  EXPECT_NEAR(transform_at(h, *sm.kernel, {cplx(0.0, 0.0)})[0].real(), direct, 1e-8);
}

TEST(Transform, RoundTripAndParseval) {
  const SpectralMeasure& sm = cosine_measure();
  GridFunction h = bump_fn(0.0, 10.0, 2001, 4.0, 2.5);
  TransformTable t = forward_transform(h, sm);
  GridFunction back = inverse_transform(t, sm, h.grid());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    num += std::pow(back.values()[i] - h.values()[i], 2);
    den += std::pow(h.values()[i], 2);
  }
  EXPECT_LE(std::sqrt(num / den), 1e-3);
  double spec = t.values.cwiseAbs2().dot(sm.mass);
  double l2 = trapezoid(linspace(0.0, 10.0, 20001), [](double x) { return std::pow(bump(x, 4.0, 2.5), 2); });
  EXPECT_NEAR(spec / l2, 1.0, 1e-2);
}

TEST(Transform, ZeroTableGivesZero) {
  const SpectralMeasure& sm = cosine_measure();
  TransformTable t;
  t.lambdas.assign(sm.lambda.data(), sm.lambda.data() + sm.lambda.size());
  t.values = Eigen::VectorXd::Zero(sm.lambda.size());
  GridFunction z = inverse_transform(t, sm, linspace(0.0, 5.0, 11));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
}

TEST(Transform, MismatchedTableRejected) {
  const SpectralMeasure& sm = cosine_measure();
  TransformTable t;
  t.lambdas = {1.0};
  t.values = Eigen::VectorXd::Ones(1);
  EXPECT_THROW(inverse_transform(t, sm, {1.0}), DomainError);
}

TEST(HeatKernel, CosineOrigin) {
  EXPECT_NEAR(heat_kernel(0.25, 0.0, 0.0, cosine_measure()), 2.0 / std::sqrt(kPi), 1e-8);
}

TEST(HeatKernel, CosineClosedFormAndSymmetry) {
  auto g = linspace(0.0, 3.0, 13);
  for (double t : {0.25, 1.0}) {
    Eigen::MatrixXd p = heat_kernel_grid(t, g, g, cosine_measure());
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) {
        auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
        EXPECT_NEAR(p(I, J), neumann_gauss(t, g[i], g[j]), 1e-5);
        EXPECT_NEAR(p(I, J), p(J, I), 1e-10);
      }
  }
}

TEST(HeatKernel, SubProbability) {
  for (const SpectralMeasure* sm : {&cosine_measure(), &bessel_measure()}) {
    auto ys = linspace(sm->start(), sm->L, 8001);
    Eigen::MatrixXd p = heat_kernel_grid(0.25, {1.0}, ys, *sm);
    const auto& op = sm->kernel->op();
    double mass = 0.0;
    for (std::size_t j = 0; j + 1 < ys.size(); ++j)
      mass += 0.5 * (ys[j + 1] - ys[j]) *
              (p(0, static_cast<Eigen::Index>(j)) * op.r(ys[j]) + p(0, static_cast<Eigen::Index>(j + 1)) * op.r(ys[j + 1]));
    EXPECT_LE(mass, 1.0 + 1e-6);
    EXPECT_NEAR(mass, 1.0, 1e-4);
  }
}

TEST(HeatKernel, RejectsNonPositiveTime) { EXPECT_THROW(heat_kernel(0.0, 1.0, 1.0, cosine_measure()), DomainError); }
