#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slhyper/expr.hpp"

namespace slhyper {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Coefficient: either a parsed expression or a native function (used for
// numerically derived operators such as the kappa-modified one).
class Coefficient {
 public:
  Coefficient() = default;
  Coefficient(CoefficientExpr e);  // NOLINT(google-explicit-constructor)
  Coefficient(std::string name, std::function<double(double)> f);

  double operator()(double x) const { return expr_ ? expr_->eval(x) : fn_(x); }
  double d1(double x) const;
  double d2(double x) const;
  std::string text() const;
  const CoefficientExpr* expr() const { return expr_ ? &*expr_ : nullptr; }

 private:
  std::optional<CoefficientExpr> expr_;
  std::optional<CoefficientExpr> dexpr_, ddexpr_;
  std::string name_;
  std::function<double(double)> fn_;
};

// Operator l(u) = -(1/r)(p u')' on (a, b).
struct OperatorSpec {
  std::string name;
  double a = 0.0;
  double b = kInf;
  Coefficient p;
  Coefficient r;
  // Candidate eta for the MP certificate, as a function of the anchored
  // standard coordinate (see StandardForm::to_std). Defaults to 0.
  std::optional<CoefficientExpr> eta;
  // Reference point used by gamma; NaN means "choose automatically".
  double c = std::numeric_limits<double>::quiet_NaN();

  double default_c() const;
  // Positivity of p and r on the probe grid; throws DomainError.
  void validate(int probes = 1000) const;
};

OperatorSpec make_operator(std::string name, double a, double b, std::string_view p,
                           std::string_view r, std::optional<std::string> eta = std::nullopt);

// "builtin:cosine", "builtin:bessel?alpha=0.5", "builtin:whittaker?alpha=0.25&kappa=1".
OperatorSpec builtin_operator(std::string_view id);
// JSON text: {name, a, b, p, r} or {name, standard_form: {A, gamma_a}}, optional eta.
OperatorSpec operator_from_json(std::string_view json_text);
// Either "builtin:..." or a path to a JSON file.
OperatorSpec load_operator(const std::string& source);

struct LeftBoundaryReport {
  bool finite = false;
  double value = kInf;
  std::vector<std::pair<double, double>> trace;  // (a_k, partial value)
};
LeftBoundaryReport check_left_boundary(const OperatorSpec& op, double c);

class StandardForm {
 public:
  StandardForm(const OperatorSpec& op, double c);

  const OperatorSpec& op() const { return *op_; }
  double c() const { return c_; }

  double gamma(double x) const;         // integral of sqrt(r/p) from c to x
  double gamma_inv(double xi) const;    // inverse, tolerance 1e-12 in x
  double gamma_a() const { return gamma_a_; }  // may be -inf
  double gamma_b() const { return gamma_b_; }  // +inf when accepted
  bool degenerate() const { return !std::isfinite(gamma_a_); }

  // Anchored standard coordinate: gamma(x) - gamma(a) if finite, else gamma(x).
  double to_std(double x) const;
  double from_std(double s) const;

  // A'/A as a function of the original variable x.
  double dlogA_at_x(double x) const;
  // A, A'/A and the Liouville potential at an anchored standard coordinate.
  double A(double s) const;
  double dlogA(double s) const;
  double liouville_q(double s) const;
  double liouville_q_at_x(double x) const;

  double sigma() const { return sigma_; }
  double sigma_error() const { return sigma_err_; }
  const std::vector<std::pair<double, double>>& sigma_trace() const { return sigma_trace_; }

 private:
  double gamma_between(double x0, double x1) const;

  std::shared_ptr<const OperatorSpec> op_;
  double c_;
  double gamma_a_ = -kInf, gamma_b_ = kInf;
  double sigma_ = 0.0, sigma_err_ = 0.0;
  std::vector<std::pair<double, double>> sigma_trace_;
  std::vector<double> tab_x_, tab_g_;  // monotone gamma table for inversion
};

StandardForm build_standard_form(const OperatorSpec& op, double c);

struct MpChecks {
  bool phi_decreasing = false;
  bool psi_decreasing = false;
  bool phi_vanishes_at_infinity = false;
  bool eta_nonnegative = false;
  bool all() const { return phi_decreasing && psi_decreasing && phi_vanishes_at_infinity && eta_nonnegative; }
};

struct MpCertificate {
  CoefficientExpr eta;
  MpChecks checks;
  std::vector<double> probe_s;  // anchored standard coordinates, increasing
  std::vector<double> phi, psi, eta_values;
  bool degenerate = false;
  std::shared_ptr<const StandardForm> sf;
  double phi_eta(double s) const;
  double psi_eta(double s) const;
};

MpCertificate certify_mp(const StandardForm& sf, const CoefficientExpr& eta, int probes = 600);
MpCertificate certify_mp(const StandardForm& sf);  // uses op().eta or 0

struct SupportParams {
  double x0 = kInf;
  double x1 = kInf;
  double eta_at_origin = 0.0;
};

SupportParams support_params(const MpCertificate& cert);

}  // namespace slhyper
