#include "slhyper/operator_model.hpp"

#include <algorithm>
#include "quad.hpp"
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "slhyper/errors.hpp"

namespace slhyper {
namespace {


std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_param(const std::map<std::string, std::string>& kv, const std::string& key, double dflt) {
  auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DomainError("bad value for builtin parameter '" + key + "': " + it->second);
  }
}

double json_real(const nlohmann::json& j, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity" || s == "+infinity") return kInf;
    if (s == "-inf" || s == "-infinity") return -kInf;
    try {
      return std::stod(s);
    } catch (const std::exception&) {
    }
  }
  throw ParseError(std::string("field '") + key + "' must be a number or +-inf", 0);
}

// Partial gamma increments on a geometric sequence of points moving toward
// an endpoint; returns true if the increments do not shrink (divergence).
bool increments_diverge(const std::vector<double>& g_decades, bool& decided) {
  std::vector<double> d;
  for (std::size_t i = 1; i < g_decades.size(); ++i) d.push_back(std::fabs(g_decades[i] - g_decades[i - 1]));
  decided = d.size() >= 2;
  if (!decided) return false;
  double r1 = d[d.size() - 1] / std::max(d[d.size() - 2], 1e-300);
  return r1 >= 0.9;
}

}  // namespace

Coefficient::Coefficient(CoefficientExpr e) : expr_(std::move(e)) {
  dexpr_ = expr_->derivative();
  ddexpr_ = dexpr_->derivative();
  name_ = expr_->source();
}

Coefficient::Coefficient(std::string name, std::function<double(double)> f)
    : name_(std::move(name)), fn_(std::move(f)) {}

double Coefficient::d1(double x) const {
  if (dexpr_) return dexpr_->eval(x);
  double h = std::max(1e-6, 1e-6 * std::fabs(x));
  return (fn_(x + h) - fn_(x - h)) / (2.0 * h);
}

double Coefficient::d2(double x) const {
  if (ddexpr_) return ddexpr_->eval(x);
  double h = std::max(1e-4, 1e-4 * std::fabs(x));
  return (fn_(x + h) - 2.0 * fn_(x) + fn_(x - h)) / (h * h);
}

std::string Coefficient::text() const { return expr_ ? expr_->to_string() : name_; }

double OperatorSpec::default_c() const {
  if (std::isfinite(a) && std::isfinite(b)) return 0.5 * (a + b);
  if (std::isfinite(a)) return a + 1.0;
  if (std::isfinite(b)) return b - 1.0;
  return 0.0;
}

void OperatorSpec::validate(int probes) const {
  if (!(a < b)) throw DomainError("operator '" + name + "': need a < b");
  auto xs = log_probe_points({a, b}, probes);
  // Exact zeros (or overflow) are tolerated only in runs touching an
  // endpoint, where they come from coefficients such as exp(-k/x).
  auto check = [&](const Coefficient& f, const char* which) {
    std::size_t n = xs.size();
    std::size_t lo = 0, hi = n;
    auto spill = [&](double v) { return v == 0.0 || std::isinf(v); };
    while (lo < n && spill(f(xs[lo]))) ++lo;
    while (hi > lo && spill(f(xs[hi - 1]))) --hi;
    if (lo == hi) throw DomainError(std::string(which) + " vanishes on the whole probe grid");
    for (std::size_t i = 0; i < n; ++i) {
      double v = f(xs[i]);
      bool edge = i < lo || i >= hi;
      if (std::isnan(v) || v < 0.0 || (spill(v) && !edge)) {
        throw DomainError("operator '" + name + "': " + which + "(" + fmt(xs[i]) + ") = " + fmt(v) +
                          " is not positive");
      }
    }
  };
  check(p, "p");
  check(r, "r");
}

OperatorSpec make_operator(std::string name, double a, double b, std::string_view p, std::string_view r,
                           std::optional<std::string> eta) {
  OperatorSpec op;
  op.name = std::move(name);
  op.a = a;
  op.b = b;
  op.p = CoefficientExpr::parse(p, "x", {a, b});
  op.r = CoefficientExpr::parse(r, "x", {a, b});
  if (eta) op.eta = CoefficientExpr::parse(*eta, "x", {0.0, kInf});
  op.validate();
  return op;
}

OperatorSpec builtin_operator(std::string_view id) {
  std::string s(id);
  if (s.rfind("builtin:", 0) == 0) s = s.substr(8);
  std::string base = s, query;
  if (auto q = s.find('?'); q != std::string::npos) {
    base = s.substr(0, q);
    query = s.substr(q + 1);
  }
  std::map<std::string, std::string> kv;
  std::stringstream qs(query);
  std::string item;
  while (std::getline(qs, item, '&')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw DomainError("builtin parameter without value: " + item);
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : kv) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw DomainError("unknown builtin parameter '" + k + "' for " + base);
    }
  };

  if (base == "cosine") {
    reject_unknown({});
    return make_operator("cosine", 0.0, kInf, "1", "1");
  }
  if (base == "bessel") {
    reject_unknown({"alpha"});
    double alpha = parse_param(kv, "alpha", 0.5);
    if (!(alpha > -0.5)) throw DomainError("bessel builtin needs alpha > -1/2");
    std::string e = "x^(" + fmt(2.0 * alpha + 1.0) + ")";
    return make_operator("bessel(alpha=" + fmt(alpha) + ")", 0.0, kInf, e, e);
  }
  if (base == "whittaker") {
    reject_unknown({"alpha", "kappa"});
    double alpha = parse_param(kv, "alpha", 0.25);
    double kappa = parse_param(kv, "kappa", 1.0);
    if (!(kappa > 0.0)) throw DomainError("whittaker builtin needs kappa > 0");
    if (!(alpha <= 0.5)) throw DomainError("whittaker builtin needs alpha <= 1/2");
    std::string common = "exp(-(" + fmt(kappa) + ")/x)*x^(" + fmt(1.0 - 2.0 * alpha) + ")";
    return make_operator("whittaker(alpha=" + fmt(alpha) + ",kappa=" + fmt(kappa) + ")", 0.0, kInf,
                         "x*" + common, "(1/x)*" + common, fmt(1.0 - 2.0 * alpha));
  }
  throw DomainError("unknown builtin operator '" + base + "'");
}

OperatorSpec operator_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid operator JSON: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ParseError("operator JSON must be an object", 0);
  std::string name = j.value("name", std::string("operator"));
  std::optional<std::string> eta;
  if (j.contains("eta")) {
    if (j["eta"].is_number()) eta = fmt(j["eta"].get<double>());
    else eta = j["eta"].get<std::string>();
  }
  auto text = [&](const nlohmann::json& obj, const char* key) -> std::string {
    if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'", 0);
    const auto& v = obj.at(key);
    if (v.is_number()) return fmt(v.get<double>());
    if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be an expression string", 0);
    return v.get<std::string>();
  };
  OperatorSpec op;
  if (j.contains("standard_form")) {
    const auto& sf = j["standard_form"];
    std::string A = text(sf, "A");
    double ga = json_real(sf, "gamma_a", 0.0);
    op = make_operator(name, ga, kInf, A, A, eta);
  } else {
    double a = json_real(j, "a", 0.0);
    double b = json_real(j, "b", kInf);
    op = make_operator(name, a, b, text(j, "p"), text(j, "r"), eta);
  }
  if (j.contains("c")) op.c = json_real(j, "c", op.default_c());
  return op;
}

OperatorSpec load_operator(const std::string& source) {
  if (source.rfind("builtin:", 0) == 0) return builtin_operator(source);
  std::ifstream in(source);
  if (!in) throw DomainError("cannot open operator file '" + source + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return operator_from_json(ss.str());
}

LeftBoundaryReport check_left_boundary(const OperatorSpec& op, double c) {
  if (!(c > op.a && c < op.b)) throw DomainError("reference point c must lie inside (a, b)");
  auto inv_p = [&](double x) {
    double v = op.p(x);
    return v > 0.0 && std::isfinite(v) ? 1.0 / v : 0.0;
  };
  // f(y) = r(y) * int_y^c dx / p(x); zero where r underflows.
  auto f = [&](double y) {
    double ry = op.r(y);
    if (!(ry > 0.0) || !std::isfinite(ry)) return 0.0;
    double inner = detail::adaptive_gk<15>(inv_p, y, c, 1e-12);
    double v = ry * inner;
    return std::isfinite(v) ? v : 0.0;
  };
  LeftBoundaryReport rep;
  double total = 0.0, prev_a = c;
  std::vector<double> partial;
  for (int k = 0; k <= 16; ++k) {
    double ak = std::isfinite(op.a) ? op.a + (c - op.a) * std::pow(10.0, -k) : c - std::pow(10.0, k);
    if (k == 0 && std::isfinite(op.a)) ak = op.a + 0.5 * (c - op.a);
    if (!(ak > op.a) || ak >= prev_a) break;
    total += detail::adaptive_gk(f, ak, prev_a, 1e-12);
    prev_a = ak;
    rep.trace.emplace_back(ak, total);
    partial.push_back(total);
    std::size_t n = partial.size();
    if (!std::isfinite(total)) break;
    if (n >= 3) {
      double tol = 1e-8 * std::max(1.0, std::fabs(total));
      if (std::fabs(partial[n - 1] - partial[n - 2]) <= tol && std::fabs(partial[n - 2] - partial[n - 3]) <= tol) {
        rep.finite = true;
        rep.value = total;
        return rep;
      }
    }
  }
  rep.finite = false;
  rep.value = partial.empty() ? kInf : partial.back();
  return rep;
}

StandardForm::StandardForm(const OperatorSpec& op, double c)
    : op_(std::make_shared<const OperatorSpec>(op)), c_(std::isnan(c) ? op.default_c() : c) {
  if (!(c_ > op.a && c_ < op.b)) throw DomainError("reference point c must lie inside (a, b)");
  auto integrand_ok = [&](double x) {
    double v = std::sqrt(op.r(x) / op.p(x));
    return std::isfinite(v) && v > 0.0;
  };
  const double q = std::pow(10.0, -0.25);
  const double scale = std::max(1.0, std::fabs(c_));

  // Left branch: points approaching a (quarter decades).
  std::vector<double> lx{c_}, lg{0.0};
  for (int k = 1; k <= 64; ++k) {
    double x = std::isfinite(op.a) ? op.a + (c_ - op.a) * std::pow(q, k) : c_ - scale * (std::pow(10.0, 0.25 * k) - 1.0);
    if (!(x > op.a) || x >= lx.back() || !integrand_ok(x)) break;
    double g = lg.back() - gamma_between(x, lx.back());
    if (!std::isfinite(g)) break;
    lx.push_back(x);
    lg.push_back(g);
  }
  std::vector<double> rx{c_}, rg{0.0};
  for (int k = 1; k <= 60; ++k) {
    double x = std::isfinite(op.b) ? op.b - (op.b - c_) * std::pow(q, k) : c_ + scale * (std::pow(10.0, 0.25 * k) - 1.0);
    if (!(x < op.b) || x <= rx.back() || !integrand_ok(x)) break;
    double g = rg.back() + gamma_between(rx.back(), x);
    if (!std::isfinite(g)) break;
    rx.push_back(x);
    rg.push_back(g);
  }

  auto decades = [](const std::vector<double>& g) {
    std::vector<double> d;
    for (std::size_t i = 0; i < g.size(); i += 4) d.push_back(g[i]);
    return d;
  };
  bool decided = false;
  bool left_div = increments_diverge(decades(lg), decided);
  if (!decided) throw DomainError("cannot classify gamma near a: coefficients unusable close to the endpoint");
  if (left_div) {
    gamma_a_ = -kInf;
  } else {
    // Remaining tail beyond the last point, bounded by a geometric series.
    auto d = decades(lg);
    std::size_t n = d.size();
    double d1 = std::fabs(d[n - 1] - d[n - 2]);
    double d0 = n >= 3 ? std::fabs(d[n - 2] - d[n - 3]) : 0.0;
    double ratio = d0 > 0.0 ? d1 / d0 : 0.0;
    double tail = ratio < 1.0 ? d1 * ratio / (1.0 - ratio) : 0.0;
    if (std::isfinite(op.a)) tail = std::min(tail, (lx.back() - op.a) * std::sqrt(op.r(lx.back()) / op.p(lx.back())) * 10.0);
    gamma_a_ = lg.back() - tail;
  }
  bool right_div = increments_diverge(decades(rg), decided);
  if (!decided || !right_div) throw DomainError("gamma(b) appears finite; the operator must satisfy gamma(b) = infinity");

  tab_x_.assign(lx.rbegin(), lx.rend());
  tab_g_.assign(lg.rbegin(), lg.rend());
  tab_x_.insert(tab_x_.end(), rx.begin() + 1, rx.end());
  tab_g_.insert(tab_g_.end(), rg.begin() + 1, rg.end());

  // sigma from decade probes of A'/(2A) toward b.
  std::vector<double> vals;
  for (int k = 0; k <= 15; ++k) {
    double x = std::isfinite(op.b) ? op.b - (op.b - c_) * std::pow(10.0, -k) : c_ + scale * std::pow(10.0, k);
    if (!(x < op.b)) break;
    double v = 0.5 * dlogA_at_x(x);
    sigma_trace_.emplace_back(x, v);
    if (std::isfinite(v)) vals.push_back(v);
  }
  bool ok = false;
  for (std::size_t i = 2; i < vals.size(); ++i) {
    if (std::fabs(vals[i] - vals[i - 1]) <= 1e-6 && std::fabs(vals[i - 1] - vals[i - 2]) <= 1e-6) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    std::ostringstream os;
    os << "sigma estimate did not stabilise; trace:";
    for (auto [x, v] : sigma_trace_) os << " (" << fmt(x) << ", " << fmt(v) << ")";
    throw DomainError(os.str());
  }
  sigma_ = vals.back();
  sigma_err_ = std::fabs(vals.back() - vals[vals.size() - 2]);
  if (std::fabs(sigma_) < 1e-10) sigma_ = 0.0;
  if (sigma_ < -1e-9) throw DomainError("sigma estimate is negative: " + fmt(sigma_));
  if (sigma_ < 0.0) sigma_ = 0.0;
}

double StandardForm::gamma_between(double x0, double x1) const {
  const auto& op = *op_;
  auto f = [&](double x) {
    double v = std::sqrt(op.r(x) / op.p(x));
    return std::isfinite(v) ? v : 0.0;
  };
  return detail::adaptive_gk(f, x0, x1, 1e-13);
}

double StandardForm::gamma(double x) const {
  if (!(x > op_->a && x < op_->b)) {
    if (x == op_->a) return gamma_a_;
    throw DomainError("gamma: x = " + fmt(x) + " outside (a, b)");
  }
  // Integrate from the nearest table node.
  auto it = std::lower_bound(tab_x_.begin(), tab_x_.end(), x);
  std::size_t i;
  if (it == tab_x_.end()) i = tab_x_.size() - 1;
  else if (it == tab_x_.begin()) i = 0;
  else {
    i = static_cast<std::size_t>(it - tab_x_.begin());
    if (x - tab_x_[i - 1] < tab_x_[i] - x) --i;
  }
  return tab_g_[i] + gamma_between(tab_x_[i], x);
}

double StandardForm::gamma_inv(double xi) const {
  if (xi < tab_g_.front() || xi > tab_g_.back()) {
    if (!(xi > gamma_a_)) throw DomainError("gamma_inv: value " + fmt(xi) + " below gamma(a)");
    if (xi < tab_g_.front()) {
      // Between gamma(a) and the first table node: continue bisecting toward a.
      double lo = std::isfinite(op_->a) ? op_->a : tab_x_.front() - 1.0;
      double hi = tab_x_.front();
      for (int it = 0; it < 2000 && hi - lo > 1e-12 * std::max(1.0, std::fabs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (gamma(mid) < xi) lo = mid;
        else hi = mid;
        if (!std::isfinite(op_->a) && gamma(lo) > xi) lo -= 2.0 * (hi - lo);
      }
      return 0.5 * (lo + hi);
    }
    throw DomainError("gamma_inv: value " + fmt(xi) + " beyond the tabulated range");
  }
  auto it = std::upper_bound(tab_g_.begin(), tab_g_.end(), xi);
  std::size_t i = it == tab_g_.end() ? tab_g_.size() - 1 : static_cast<std::size_t>(it - tab_g_.begin());
  if (i == 0) i = 1;
  double lo = tab_x_[i - 1], hi = tab_x_[i];
  double g0 = tab_g_[i - 1];
  if (xi == g0) return lo;
  if (xi == tab_g_[i]) return hi;
  auto f = [&](double x) { return g0 + gamma_between(lo, x) - xi; };
  auto tol = [](double u, double v) { return std::fabs(u - v) <= 1e-12 * std::max(1.0, std::fabs(u)); };
  std::uintmax_t iters = 200;
  auto [r0, r1] = boost::math::tools::toms748_solve(f, lo, hi, g0 - xi, tab_g_[i] - xi, tol, iters);
  return 0.5 * (r0 + r1);
}

double StandardForm::to_std(double x) const {
  double g = gamma(x);
  return std::isfinite(gamma_a_) ? g - gamma_a_ : g;
}

double StandardForm::from_std(double s) const { return gamma_inv(std::isfinite(gamma_a_) ? s + gamma_a_ : s); }

double StandardForm::dlogA_at_x(double x) const {
  const auto& op = *op_;
  double p = op.p(x), r = op.r(x);
  double u = op.p.d1(x) / p + op.r.d1(x) / r;
  return 0.5 * u * std::sqrt(p / r);
}

double StandardForm::A(double s) const {
  double x = from_std(s);
  return std::sqrt(op_->p(x) * op_->r(x));
}

double StandardForm::dlogA(double s) const { return dlogA_at_x(from_std(s)); }

double StandardForm::liouville_q_at_x(double x) const {
  const auto& op = *op_;
  double p = op.p(x), r = op.r(x);
  double pp = op.p.d1(x), rp = op.r.d1(x);
  double lp = pp / p, lr = rp / r;
  double u = lp + lr;
  double up = op.p.d2(x) / p - lp * lp + op.r.d2(x) / r - lr * lr;
  double sq = std::sqrt(p / r);
  double sqp = 0.5 * sq * (lp - lr);
  double g = 0.5 * u * sq;             // A'/A
  double gp = 0.5 * (up * sq + u * sqp);  // d/dx of A'/A
  double half = 0.5 * g;
  return half * half + 0.5 * gp * sq;
}

double StandardForm::liouville_q(double s) const { return liouville_q_at_x(from_std(s)); }

StandardForm build_standard_form(const OperatorSpec& op, double c) { return StandardForm(op, c); }

double MpCertificate::phi_eta(double s) const { return sf->dlogA(s) - eta(s); }

double MpCertificate::psi_eta(double s) const {
  double e = eta(s);
  return 0.5 * eta.derivative_at(s) - 0.25 * e * e + 0.5 * sf->dlogA(s) * e;
}

MpCertificate certify_mp(const StandardForm& sf, const CoefficientExpr& eta, int probes) {
  MpCertificate cert;
  cert.eta = eta;
  cert.sf = std::make_shared<const StandardForm>(sf);
  cert.degenerate = sf.degenerate();
  const auto& op = sf.op();
  int n = std::max(probes, 512);
  for (int attempt = 0; attempt < 6; ++attempt) {
    cert.probe_s.clear();
    cert.phi.clear();
    cert.psi.clear();
    cert.eta_values.clear();
    for (double x : log_probe_points({op.a, op.b}, n)) {
      double s, d;
      try {
        s = sf.to_std(x);
        d = sf.dlogA_at_x(x);
      } catch (const DomainError&) {
        continue;
      }
      double e = eta(s), de = eta.derivative_at(s);
      if (!std::isfinite(s) || !std::isfinite(d) || !std::isfinite(e) || !std::isfinite(de)) continue;
      if (!cert.probe_s.empty() && s <= cert.probe_s.back()) continue;
      cert.probe_s.push_back(s);
      cert.phi.push_back(d - e);
      cert.psi.push_back(0.5 * de - 0.25 * e * e + 0.5 * d * e);
      cert.eta_values.push_back(e);
    }
    if (cert.probe_s.size() >= 512) break;
    n = n * 3 / 2;
  }
  auto& ck = cert.checks;
  std::size_t m = cert.probe_s.size();
  ck.phi_decreasing = m >= 2;
  ck.psi_decreasing = m >= 2;
  ck.eta_nonnegative = m >= 1;
  for (std::size_t i = 0; i < m; ++i) {
    if (i + 1 < m) {
      if (cert.phi[i + 1] > cert.phi[i] + 1e-9) ck.phi_decreasing = false;
      if (cert.psi[i + 1] > cert.psi[i] + 1e-9) ck.psi_decreasing = false;
    }
    if (cert.eta_values[i] < -1e-12) ck.eta_nonnegative = false;
  }
  ck.phi_vanishes_at_infinity = m >= 2 && cert.phi.back() < 1e-6 * cert.phi.front() + 1e-9;
  return cert;
}

MpCertificate certify_mp(const StandardForm& sf) {
  const auto& eta = sf.op().eta;
  return certify_mp(sf, eta ? *eta : CoefficientExpr::constant(0.0));
}

SupportParams support_params(const MpCertificate& cert) {
  if (!cert.checks.all()) throw DomainError("MP not certified");
  const double atol = 1e-10;
  SupportParams sp;
  std::size_t m = cert.probe_s.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (std::fabs(cert.phi[i]) <= atol) {
      sp.x1 = i == 0 ? 0.0 : cert.probe_s[i];
      break;
    }
  }
  std::size_t last = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (std::fabs(cert.psi[i] - cert.psi[0]) <= atol) last = i;
  if (last + 1 == m) sp.x0 = kInf;
  else if (last == 0) sp.x0 = 0.0;
  else sp.x0 = cert.probe_s[last];
  double e0 = cert.eta(0.0);
  sp.eta_at_origin = (std::isfinite(e0) && !cert.degenerate) ? e0 : cert.eta_values.front();
  return sp;
}

}  // namespace slhyper
