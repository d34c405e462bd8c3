#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "slhyper/cauchy.hpp"
#include "slhyper/errors.hpp"
#include "slhyper/hconv.hpp"
#include "slhyper/inteq.hpp"
#include "slhyper/kernel.hpp"
#include "slhyper/operator_model.hpp"
#include "slhyper/spectral.hpp"

#ifndef SLHYPER_VERSION
#define SLHYPER_VERSION "0.0.0"
#endif

namespace slhyper::cli {

using json = nlohmann::ordered_json;

std::string version() { return SLHYPER_VERSION; }

namespace {

struct OptDef {
  std::string name, def, help;
};

const std::vector<OptDef> kCommon = {
    {"op", "builtin:cosine", "operator: builtin id or JSON file"},
    {"L", "40", "right end of the truncated interval"},
    {"N", "2048", "number of atoms"},
    {"lambda-max", "0", "spectral cutoff (0: resolution cap)"},
    {"format", "", "csv or json"},
    {"out", "", "output path (stdout when empty)"},
    {"precision", "10", "significant digits, 6..17"},
    {"config", "", "JSON file whose keys override the flags"},
};

struct CommandDef {
  std::string name, help, format;
  std::vector<OptDef> opts;
};

const std::vector<CommandDef> kCommands = {
    {"validate", "operator checks and MP certificate", "json", {}},
    {"kernel", "kernel values w_lambda(x)", "csv",
     {{"lambda", "0,1,4", "comma list; complex as 1+2i"}, {"x", "0:5:11", "grid lo:hi:n or comma list"}}},
    {"spectrum", "atoms of the spectral measure", "csv", {}},
    {"transform", "L-transform of a function", "csv",
     {{"h", "", "function: CSV path or bump:c,w[,n]"}, {"lambda", "", "evaluate at these lambdas instead of the atoms"}}},
    {"heatkernel", "heat kernel p(t, x, y)", "csv",
     {{"t", "0.25", "time"}, {"x-grid", "0:3:7", "x grid"}, {"y-grid", "0:3:7", "y grid"}}},
    {"product", "time-shifted product density q_t(x, y, .)", "csv",
     {{"t", "0.1", "time"}, {"x", "1", "x"}, {"y", "2", "y"}, {"xi", "", "xi grid (default 801 points over [a, L])"}}},
    {"translate", "generalized translation T^y h", "csv",
     {{"h", "", "function"}, {"y", "1", "shift"}, {"t-reg", "1e-3", "regularizing time (0: atomic shortcut)"},
      {"grid", "", "output grid (default: grid of h)"}}},
    {"convolve", "convolution h * g", "csv",
     {{"h", "", "function"}, {"g", "", "function"}, {"t-reg", "1e-3", "regularizing time"},
      {"grid", "", "output grid (default: grid of h)"}}},
    {"support", "support classification of delta_x * delta_y", "json",
     {{"x", "1", "x"}, {"y", "2", "y"}, {"weak-limit", "false", "also report moments along a t schedule"},
      {"t-schedule", "0.1,0.03,0.01,0.003,0.001", "decreasing times"}, {"probes", "0.5,1,2", "probe lambdas"}}},
    {"cauchy", "spectral solution of l_x f = l_y f, f(x, a) = h(x)", "csv",
     {{"h", "", "function"}, {"grid", "0:6:61", "grid for both x and y"}, {"x-grid", "", "x grid (overrides grid)"},
      {"y-grid", "", "y grid (overrides grid)"}, {"a-m", "", "shifted origin a < a_m"}}},
    {"triangle", "triangle identity for the Cauchy solution", "json",
     {{"h", "bump:4,2.5", "function"}, {"c", "0.5", "lower corner (standard coordinate)"},
      {"x", "3", "apex xi (standard coordinate)"}, {"y", "1.5", "apex zeta (standard coordinate)"},
      {"n", "64", "lattice steps"}}},
    {"solve-inteq", "solve rho h + h * f = psi with rho = 1", "csv",
     {{"f", "", "CSV path, bump:c,w[,n] or heatkernel:t,x"}, {"psi", "", "right-hand side"},
      {"kappa", "", "strip parameter (default sigma^2)"}, {"diagnostics", "", "JSON diagnostics path (default stderr)"}}},
    {"selftest", "run the oracle suite", "json", {}},
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

double to_num(const std::string& key, const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw UsageError("--" + key + ": not a number: '" + s + "'");
  return v;
}

cplx to_cplx(const std::string& key, const std::string& s) {
  if (s.empty() || s.back() != 'i') return {to_num(key, s), 0.0};
  std::string body = s.substr(0, s.size() - 1);
  // split at the last sign that is not part of an exponent
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      std::string im = body.substr(k);
      if (im == "+" || im == "-") im += "1";
      return {to_num(key, body.substr(0, k)), to_num(key, im)};
    }
  }
  if (body.empty() || body == "+" || body == "-") body += "1";
  return {0.0, to_num(key, body)};
}

class Config {
 public:
  std::string command;
  std::map<std::string, std::string> values;

  const std::string& str(const std::string& k) const { return values.at(k); }
  bool has(const std::string& k) const { return !values.at(k).empty(); }
  double num(const std::string& k) const { return to_num(k, str(k)); }
  double positive(const std::string& k) const {
    double v = num(k);
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("--" + k + " must be positive");
    return v;
  }
  int integer(const std::string& k) const {
    double v = num(k);
    if (v != std::floor(v) || std::fabs(v) > 1e9) throw UsageError("--" + k + " must be an integer");
    return static_cast<int>(v);
  }
  bool flag(const std::string& k) const {
    const std::string& v = str(k);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0" || v.empty()) return false;
    throw UsageError("--" + k + " expects true or false");
  }
  std::vector<double> list(const std::string& k) const {
    std::vector<double> out;
    for (auto& t : split(str(k), ',')) out.push_back(to_num(k, t));
    if (out.empty()) throw UsageError("--" + k + " is empty");
    return out;
  }
  std::vector<double> grid(const std::string& k) const {
    auto parts = split(str(k), ':');
    if (parts.size() == 3) {
      int n = static_cast<int>(to_num(k, parts[2]));
      if (n < 2) throw UsageError("--" + k + ": a grid needs at least two points");
      return linspace(to_num(k, parts[0]), to_num(k, parts[1]), n);
    }
    if (parts.size() != 1) throw UsageError("--" + k + ": expected lo:hi:n or a comma list");
    return list(k);
  }
  std::vector<cplx> cplx_list(const std::string& k) const {
    std::vector<cplx> out;
    for (auto& t : split(str(k), ',')) out.push_back(to_cplx(k, t));
    if (out.empty()) throw UsageError("--" + k + " is empty");
    return out;
  }
  std::string canonical() const {
    json j;
    j["command"] = command;
    for (auto& [k, v] : values)
      if (k != "out" && k != "config" && k != "diagnostics") j[k] = v;
    return j.dump();
  }
};

class Emitter {
 public:
  Emitter(std::ostream& os, int precision, std::string header) : os_(os), prec_(precision), header_(std::move(header)) {}

  std::string fmt(double v) const {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec_, v == 0.0 ? 0.0 : v);
    return buf;
  }
  json jnum(double v) const {
    if (!std::isfinite(v)) return nullptr;
    return std::strtod(fmt(v).c_str(), nullptr);
  }
  json jlist(const std::vector<double>& v) const {
    json a = json::array();
    for (double x : v) a.push_back(jnum(x));
    return a;
  }
  void csv_header(const std::vector<std::string>& cols) {
    os_ << header_ << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
    os_ << '\n';
  }
  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) os_ << (i ? "," : "") << fmt(vals[i]);
    os_ << '\n';
  }
  std::ostream& stream() { return os_; }
  int precision() const { return prec_; }

 private:
  std::ostream& os_;
  int prec_;
  std::string header_;
};

struct Context {
  const Config& cfg;
  Emitter& em;
  json meta;
  std::ostream& err;
  OperatorSpec op;
  std::shared_ptr<Kernel> kernel;
  std::optional<SpectralMeasure> sm_;
  std::optional<MpCertificate> cert_;

  bool json_out() const { return cfg.str("format") == "json"; }

  const SpectralMeasure& sm() {
    if (!sm_) {
      SpectralOptions o;
      o.lambda_max = cfg.num("lambda-max");
      if (o.lambda_max < 0.0) throw UsageError("--lambda-max must be non-negative");
      sm_ = build_spectral_measure(kernel, cfg.positive("L"), cfg.integer("N"), o);
    }
    return *sm_;
  }
  const MpCertificate& cert() {
    if (!cert_) cert_ = certify_mp(StandardForm(op, op.c));
    return *cert_;
  }

  GridFunction function(const std::string& key) {
    const std::string& src = cfg.str(key);
    if (src.empty()) throw UsageError("--" + key + " is required");
    if (src.rfind("bump:", 0) == 0) {
      auto p = split(src.substr(5), ',');
      if (p.size() != 2 && p.size() != 3) throw UsageError("--" + key + ": expected bump:center,halfwidth[,n]");
      double c = to_num(key, p[0]), w = to_num(key, p[1]);
      int n = p.size() == 3 ? static_cast<int>(to_num(key, p[2])) : 801;
      if (!(w > 0.0) || n < 5) throw UsageError("--" + key + ": bad bump parameters");
      double lo = std::max(c - w, op.a);
      GridFunction g = GridFunction::sample(linspace(lo, c + w, n), [&](double x) { return bump(x, c, w); });
      g.check_admissible();
      return g;
    }
    if (src.rfind("heatkernel:", 0) == 0) {
      auto p = split(src.substr(11), ',');
      if (p.size() != 2) throw UsageError("--" + key + ": expected heatkernel:t,x");
      const SpectralMeasure& m = sm();
      return heat_kernel_slice(to_num(key, p[0]), to_num(key, p[1]), m, linspace(m.start(), m.L, 4001));
    }
    GridFunction g = read_grid_csv(src);
    g.check_admissible();
    return g;
  }

  void emit_json(json body) {
    json j;
    j["meta"] = meta;
    for (auto& [k, v] : body.items()) j[k] = v;
    em.stream() << j.dump(2) << '\n';
  }
};

json cplx_json(const Emitter& em, cplx z) { return json::array({em.jnum(z.real()), em.jnum(z.imag())}); }

void cmd_validate(Context& ctx) {
  const OperatorSpec& op = ctx.op;
  auto& em = ctx.em;
  op.validate();
  StandardForm sf(op, op.c);
  LeftBoundaryReport lb = check_left_boundary(op, sf.c());
  json body;
  body["name"] = op.name;
  body["a"] = em.jnum(op.a);
  body["b"] = em.jnum(op.b);
  body["left_boundary_finite"] = lb.finite;
  body["left_boundary_value"] = em.jnum(lb.value);
  body["gamma_a"] = em.jnum(sf.gamma_a());
  body["degenerate"] = sf.degenerate();
  body["sigma"] = em.jnum(sf.sigma());
  body["sigma_error"] = em.jnum(sf.sigma_error());
  const MpCertificate& cert = ctx.cert();
  body["mp_certified"] = cert.checks.all();
  body["checks"] = {{"phi_decreasing", cert.checks.phi_decreasing},
                    {"psi_decreasing", cert.checks.psi_decreasing},
                    {"phi_vanishes_at_infinity", cert.checks.phi_vanishes_at_infinity},
                    {"eta_nonnegative", cert.checks.eta_nonnegative}};
  SupportParams sp = support_params(cert);
  body["support_params"] = {{"x0", em.jnum(sp.x0)}, {"x1", em.jnum(sp.x1)}, {"eta_at_origin", em.jnum(sp.eta_at_origin)}};
  ctx.emit_json(body);
}

void cmd_kernel(Context& ctx) {
  auto lams = ctx.cfg.cplx_list("lambda");
  auto xs = ctx.cfg.grid("x");
  std::vector<std::vector<double>> rows;
  for (cplx l : lams)
    for (double x : xs) {
      KernelValue v = ctx.kernel->eval_w(l, x);
      rows.push_back({l.real(), l.imag(), x, v.w.real(), v.w.imag(), v.w1.real(), v.w1.imag(), v.est_error});
    }
  std::vector<std::string> cols{"lambda_re", "lambda_im", "x", "w_re", "w_im", "w1_re", "w1_im", "est_error"};
  if (ctx.json_out()) {
    json arr = json::array();
    for (auto& r : rows) {
      json o;
      for (std::size_t i = 0; i < cols.size(); ++i) o[cols[i]] = ctx.em.jnum(r[i]);
      arr.push_back(o);
    }
    ctx.emit_json({{"values", arr}});
    return;
  }
  ctx.em.csv_header(cols);
  for (auto& r : rows) ctx.em.row(r);
}

void table_out(Context& ctx, const std::vector<std::string>& cols, const std::vector<std::vector<double>>& rows,
               json extra = json::object()) {
  if (ctx.json_out()) {
    json body = extra;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::vector<double> col;
      for (auto& r : rows) col.push_back(r[c]);
      body[cols[c]] = ctx.em.jlist(col);
    }
    ctx.emit_json(body);
    return;
  }
  ctx.em.csv_header(cols);
  for (auto& r : rows) ctx.em.row(r);
}

void cmd_spectrum(Context& ctx) {
  const SpectralMeasure& sm = ctx.sm();
  std::vector<std::vector<double>> rows;
  for (Eigen::Index k = 0; k < sm.lambda.size(); ++k)
    rows.push_back({static_cast<double>(k), sm.lambda(k), sm.mass(k)});
  json extra = {{"L", ctx.em.jnum(sm.L)}, {"sigma2", ctx.em.jnum(sm.sigma2)}, {"lambda_cap", ctx.em.jnum(sm.lambda_cap)}};
  table_out(ctx, {"k", "lambda_k", "mass_k"}, rows, extra);
}

void cmd_transform(Context& ctx) {
  GridFunction h = ctx.function("h");
  std::vector<std::vector<double>> rows;
  if (ctx.cfg.has("lambda")) {
    auto lams = ctx.cfg.cplx_list("lambda");
    auto vals = transform_at(h, *ctx.kernel, lams);
    for (std::size_t i = 0; i < lams.size(); ++i)
      rows.push_back({lams[i].real(), lams[i].imag(), vals[i].real(), vals[i].imag()});
    table_out(ctx, {"lambda_re", "lambda_im", "F_re", "F_im"}, rows);
    return;
  }
  const SpectralMeasure& sm = ctx.sm();
  TransformTable t = forward_transform(h, sm);
  for (std::size_t k = 0; k < t.lambdas.size(); ++k)
    rows.push_back({static_cast<double>(k), t.lambdas[k], t.values(static_cast<Eigen::Index>(k)),
                    sm.mass(static_cast<Eigen::Index>(k))});
  table_out(ctx, {"k", "lambda_k", "Fh", "mass_k"}, rows);
}

void cmd_heatkernel(Context& ctx) {
  double t = ctx.cfg.positive("t");
  auto xs = ctx.cfg.grid("x-grid"), ys = ctx.cfg.grid("y-grid");
  Eigen::MatrixXd p = heat_kernel_grid(t, xs, ys, ctx.sm());
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j)
      rows.push_back({xs[i], ys[j], p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  table_out(ctx, {"x", "y", "p"}, rows, {{"t", ctx.em.jnum(t)}});
}

void cmd_product(Context& ctx) {
  const SpectralMeasure& sm = ctx.sm();
  double t = ctx.cfg.positive("t");
  std::vector<double> xi = ctx.cfg.has("xi") ? ctx.cfg.grid("xi") : linspace(sm.start(), sm.L, 801);
  ProductKernel pk = product_density(t, ctx.cfg.num("x"), ctx.cfg.num("y"), xi, sm);
  if (pk.mass_warning) ctx.err << "warning: product density mass " << ctx.em.fmt(pk.mass) << " differs from 1\n";
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < pk.xi.size(); ++i) rows.push_back({pk.xi[i], pk.q(static_cast<Eigen::Index>(i)), pk.mass});
  table_out(ctx, {"xi", "q", "mass"}, rows);
}

void function_out(Context& ctx, const GridFunction& g) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < g.size(); ++i) rows.push_back({g.grid()[i], g.values()[i]});
  table_out(ctx, {"x", "value"}, rows);
}

void cmd_translate(Context& ctx) {
  GridFunction h = ctx.function("h");
  std::vector<double> grid = ctx.cfg.has("grid") ? ctx.cfg.grid("grid") : h.grid();
  double t_reg = ctx.cfg.num("t-reg");
  const MpCertificate* cert = t_reg == 0.0 ? &ctx.cert() : nullptr;
  function_out(ctx, translate(h, ctx.cfg.num("y"), ctx.sm(), t_reg, grid, cert));
}

void cmd_convolve(Context& ctx) {
  GridFunction h = ctx.function("h"), g = ctx.function("g");
  std::vector<double> grid = ctx.cfg.has("grid") ? ctx.cfg.grid("grid") : h.grid();
  function_out(ctx, convolve_functions(h, g, ctx.sm(), ctx.cfg.positive("t-reg"), grid));
}

void cmd_support(Context& ctx) {
  auto& em = ctx.em;
  double x = ctx.cfg.num("x"), y = ctx.cfg.num("y");
  SupportReport rep = classify_support(x, y, ctx.cert());
  json body;
  body["case"] = rep.kcase;
  json sup = json::array();
  for (auto& [lo, hi] : rep.support) sup.push_back(json::array({em.jnum(lo), em.jnum(hi)}));
  body["support"] = sup;
  body["atomic"] = rep.atomic;
  body["atoms"] = em.jlist(rep.atoms);
  body["weights"] = em.jlist(rep.weights);
  body["gamma_mapped"] = rep.gamma_mapped;
  body["params"] = {{"x0", em.jnum(rep.params.x0)}, {"x1", em.jnum(rep.params.x1)},
                    {"eta_at_origin", em.jnum(rep.params.eta_at_origin)}};
  if (ctx.cfg.flag("weak-limit")) {
    MeasureApprox ma = approx_nu(x, y, ctx.cfg.list("t-schedule"), ctx.sm(), ctx.cfg.list("probes"));
    json wl;
    wl["t_schedule"] = em.jlist(ma.t_schedule);
    wl["probe_lambdas"] = em.jlist(ma.probe_lambdas);
    json mom = json::array();
    for (Eigen::Index i = 0; i < ma.moments.rows(); ++i) {
      std::vector<double> r(static_cast<std::size_t>(ma.moments.cols()));
      for (Eigen::Index j = 0; j < ma.moments.cols(); ++j) r[static_cast<std::size_t>(j)] = ma.moments(i, j);
      mom.push_back(em.jlist(r));
    }
    wl["moments"] = mom;
    wl["gaps"] = em.jlist(ma.gaps);
    wl["limit_moments"] = em.jlist(ma.limit_moments);
    wl["exact_moments"] = em.jlist(ma.exact_moments);
    body["weak_limit"] = wl;
  }
  ctx.emit_json(body);
}

void cmd_cauchy(Context& ctx) {
  GridFunction h = ctx.function("h");
  std::vector<double> xs = ctx.cfg.has("x-grid") ? ctx.cfg.grid("x-grid") : ctx.cfg.grid("grid");
  std::vector<double> ys = ctx.cfg.has("y-grid") ? ctx.cfg.grid("y-grid") : ctx.cfg.grid("grid");
  CauchySolution sol = ctx.cfg.has("a-m") ? solve_cauchy_shifted(h, ctx.cfg.num("a-m"), ctx.sm(), xs, ys)
                                          : solve_cauchy(h, ctx.sm(), xs, ys);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
      rows.push_back({xs[i], ys[j], sol.f(I, J), sol.pde_residual(I, J)});
    }
  table_out(ctx, {"x", "y", "f", "pde_residual"}, rows, {{"max_pde_residual", ctx.em.jnum(sol.max_pde_residual)}});
}

void cmd_triangle(Context& ctx) {
  auto& em = ctx.em;
  GridFunction h = ctx.function("h");
  const MpCertificate& cert = ctx.cert();
  const StandardForm& sf = *cert.sf;
  double c = ctx.cfg.num("c"), x = ctx.cfg.num("x"), y = ctx.cfg.num("y");
  int n = ctx.cfg.integer("n");
  if (n < 2) throw UsageError("--n must be at least 2");
  if (!(y > c)) throw DomainError("need c < y");
  double d = (y - c) / n;
  auto grid_between = [&](double lo, double hi) {
    return linspace(sf.from_std(lo), sf.from_std(hi), 41);
  };
  std::vector<double> xs = grid_between(x - y + c - 2 * d, x + y - c + 2 * d);
  std::vector<double> ys = grid_between(c - 2 * d, y + 2 * d);
  CauchySolution sol = solve_cauchy(h, ctx.sm(), xs, ys);
  TriangleIdentityReport r = triangle_identity_residual(sol, cert, c, x, y, n);
  json body = {{"c", em.jnum(r.c)},   {"x", em.jnum(r.x)},   {"y", em.jnum(r.y)},     {"n", r.n},
               {"H", em.jnum(r.H)},   {"I0", em.jnum(r.I0)}, {"I1", em.jnum(r.I1)},   {"I2", em.jnum(r.I2)},
               {"I3", em.jnum(r.I3)}, {"I4", em.jnum(r.I4)}, {"lhs", em.jnum(r.lhs)}, {"rhs", em.jnum(r.rhs)},
               {"residual", em.jnum(r.residual)}};
  ctx.emit_json(body);
}

json check_json(const Emitter& em, const WienerLevyReport& c) {
  return {{"ok", c.ok},
          {"min_modulus", em.jnum(c.min_modulus)},
          {"witness", cplx_json(em, c.witness)},
          {"witness_modulus", em.jnum(c.witness_modulus)},
          {"zero_bracketed", c.zero_bracketed},
          {"tail_bound", em.jnum(c.tail_bound)},
          {"norm_bound", em.jnum(c.norm_bound)},
          {"tail_is_surrogate", c.tail_is_surrogate},
          {"samples", c.samples}};
}

int cmd_solve_inteq(Context& ctx, const std::string& diag_path) {
  auto& em = ctx.em;
  const SpectralMeasure& sm = ctx.sm();
  EquationProblem prob;
  prob.f = ctx.function("f");
  prob.psi = ctx.function("psi");
  prob.kappa = ctx.cfg.has("kappa") ? ctx.cfg.num("kappa") : sm.sigma2;
  prob.rho = 1.0;
  WienerLevyReport chk = wiener_levy_check(prob.f, SpectralStrip(prob.kappa, sm.sigma2), prob.rho, sm);
  json diag;
  diag["meta"] = ctx.meta;
  diag["check"] = check_json(em, chk);
  auto write_diag = [&] {
    if (diag_path.empty()) {
      ctx.err << diag.dump(2) << '\n';
    } else {
      std::ofstream d(diag_path);
      if (!d) throw DomainError("cannot write '" + diag_path + "'");
      d << diag.dump(2) << '\n';
    }
  };
  if (!chk.ok) {
    write_diag();
    throw DomainError("not solvable: rho + Ff vanishes near lambda = " + em.fmt(chk.witness.real()) +
                      (chk.witness.imag() != 0.0 ? " + " + em.fmt(chk.witness.imag()) + "i" : std::string()));
  }
  EquationSolution sol = solve_equation(prob, sm);
  diag["transform_residual"] = em.jnum(sol.transform_residual);
  if (sol.transform_residual > 1e-4)
    ctx.err << "warning: transform residual " << em.fmt(sol.transform_residual)
            << "; the psi grid is probably too short to hold h\n";
  if (ctx.json_out()) {
    json body;
    body["x"] = em.jlist(sol.h.grid());
    body["h"] = em.jlist(sol.h.values());
    body["diagnostics"] = {{"check", diag["check"]}, {"transform_residual", diag["transform_residual"]}};
    ctx.emit_json(body);
    return 0;
  }
  write_diag();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < sol.h.size(); ++i) rows.push_back({sol.h.grid()[i], sol.h.values()[i]});
  table_out(ctx, {"x", "h"}, rows);
  return 0;
}

void apply_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  for (auto& [k, v] : j.items()) {
    if (k == "config") continue;
    auto it = cfg.values.find(k);
    if (it == cfg.values.end()) throw UsageError("config file: unknown key '" + k + "'");
    if (v.is_string()) {
      it->second = v.get<std::string>();
    } else if (v.is_number() || v.is_boolean()) {
      it->second = v.dump();
    } else if (v.is_array()) {
      std::string s;
      for (auto& e : v) s += (s.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
      it->second = s;
    } else {
      throw UsageError("config file: unsupported value for '" + k + "'");
    }
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sturm-Liouville hypergroup toolkit"};
  app.name("slhyper");
  app.require_subcommand(1);
  app.set_version_flag("--version", SLHYPER_VERSION);
  std::map<std::string, std::map<std::string, std::string>> store;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cd : kCommands) {
    CLI::App* sub = app.add_subcommand(cd.name, cd.help);
    sub->set_help_flag("--help", "print this help");
    subs[cd.name] = sub;
    auto& vals = store[cd.name];
    std::vector<OptDef> opts = kCommon;
    opts.insert(opts.end(), cd.opts.begin(), cd.opts.end());
    for (const auto& o : opts) {
      vals[o.name] = o.name == "format" ? cd.format : o.def;
      sub->add_option("--" + o.name, vals[o.name], o.help)->capture_default_str();
    }
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n";
    const CLI::App* shown = &app;
    for (auto& [name, sub] : subs)
      if (sub->parsed()) shown = sub;
    err << shown->help();
    return 2;
  }

  std::string command;
  for (auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  try {
    Config cfg;
    cfg.command = command;
    cfg.values = store[command];
    if (!cfg.str("config").empty()) apply_config_file(cfg, cfg.str("config"));
    int precision = cfg.integer("precision");
    if (precision < 6 || precision > 17) throw UsageError("--precision must lie in [6, 17]");
    const std::string fmt = cfg.str("format");
    if (fmt != "csv" && fmt != "json") throw UsageError("--format must be csv or json");
    cfg.positive("L");
    if (cfg.integer("N") < 8) throw UsageError("--N must be at least 8");

    std::ofstream file;
    std::ostream* os = &out;
    if (!cfg.str("out").empty()) {
      file.open(cfg.str("out"));
      if (!file) throw DomainError("cannot write '" + cfg.str("out") + "'");
      os = &file;
    }

    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.canonical())));
    json meta = {{"tool", "slhyper"}, {"version", SLHYPER_VERSION}, {"command", command}, {"config_hash", hash}};
    Emitter em(*os, precision, "# slhyper " + version() + " " + command + " config " + hash);

    if (command == "selftest") {
      *os << "# slhyper " << version() << " selftest config " << hash << '\n';
      return selftest(*os, precision) ? 0 : 1;
    }

    Context ctx{cfg, em, meta, err, load_operator(cfg.str("op")), nullptr, std::nullopt, std::nullopt};
    ctx.kernel = std::make_shared<Kernel>(ctx.op);

    if (command == "validate") cmd_validate(ctx);
    else if (command == "kernel") cmd_kernel(ctx);
    else if (command == "spectrum") cmd_spectrum(ctx);
    else if (command == "transform") cmd_transform(ctx);
    else if (command == "heatkernel") cmd_heatkernel(ctx);
    else if (command == "product") cmd_product(ctx);
    else if (command == "translate") cmd_translate(ctx);
    else if (command == "convolve") cmd_convolve(ctx);
    else if (command == "support") cmd_support(ctx);
    else if (command == "cauchy") cmd_cauchy(ctx);
    else if (command == "triangle") cmd_triangle(ctx);
    else if (command == "solve-inteq") return cmd_solve_inteq(ctx, cfg.str("diagnostics"));
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.get_subcommand(command)->help();
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace slhyper::cli
