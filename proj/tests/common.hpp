#pragma once

#include <cmath>
#include <memory>
#include <numbers>

#include "slhyper/grid.hpp"
#include "slhyper/kernel.hpp"
#include "slhyper/operator_model.hpp"
#include "slhyper/spectral.hpp"

namespace slhyper::testing {

inline constexpr double kPi = std::numbers::pi;

// Measures are expensive, so each test binary builds them once.
inline const SpectralMeasure& cosine_measure() {
  static const SpectralMeasure sm =
      build_spectral_measure(std::make_shared<Kernel>(builtin_operator("builtin:cosine")), 40.0, 2048);
  return sm;
}

inline const SpectralMeasure& bessel_measure() {
  static const SpectralMeasure sm =
      build_spectral_measure(std::make_shared<Kernel>(builtin_operator("builtin:bessel?alpha=0.5")), 20.0, 2048);
  return sm;
}

inline const SpectralMeasure& whittaker_measure() {
  static const SpectralMeasure sm = build_spectral_measure(
      std::make_shared<Kernel>(builtin_operator("builtin:whittaker?alpha=0.25&kappa=1")), 40.0, 1024);
  return sm;
}

inline MpCertificate certificate(const OperatorSpec& op) { return certify_mp(StandardForm(op, op.c)); }

// Half-line Neumann heat kernel of -u'' (closed form).
inline double neumann_gauss(double t, double x, double y) {
  return (std::exp(-(x - y) * (x - y) / (4 * t)) + std::exp(-(x + y) * (x + y) / (4 * t))) / (2 * std::sqrt(kPi * t));
}

inline double sinc_kernel(double lambda, double x) {
  double z = x * std::sqrt(lambda);
  return z == 0.0 ? 1.0 : std::sin(z) / z;
}

inline GridFunction bump_fn(double lo, double hi, int n, double center, double halfwidth) {
  GridFunction g = GridFunction::sample(linspace(lo, hi, n), [=](double x) { return bump(x, center, halfwidth); });
  g.check_admissible();
  return g;
}

// Composite trapezoid on a grid (independent of the library rule).
template <class F>
double trapezoid(const std::vector<double>& xs, F f) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) s += 0.5 * (xs[i + 1] - xs[i]) * (f(xs[i]) + f(xs[i + 1]));
  return s;
}

}  // namespace slhyper::testing
