#include "slhyper/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "slhyper/chebyshev.hpp"
#include "slhyper/errors.hpp"
#include "slhyper/parallel.hpp"

namespace slhyper {
namespace {

constexpr int kNodes = 24;
constexpr int kTerms = 40;
constexpr double kTiny = 1e-290;

bool usable(double v) { return std::isfinite(v) && v >= kTiny; }

Panel make_panel(const OperatorSpec& op, const ChebRule& R, double x0, double x1) {
  const int n = R.n;
  const double h2 = 0.5 * (x1 - x0);
  Panel P;
  P.x0 = x0;
  P.x1 = x1;
  P.x.resize(n);
  P.p.resize(n);
  P.r.resize(n);
  Eigen::VectorXd invp(n);
  for (int i = 0; i < n; ++i) {
    double x = i == 0 ? x0 : (i == n - 1 ? x1 : x0 + (R.t[i] + 1.0) * h2);
    P.x(i) = x;
    P.p(i) = op.p(x);
    P.r(i) = op.r(x);
    if (!(P.p(i) > 0.0) || !std::isfinite(P.p(i)) || !(P.r(i) > 0.0) || !std::isfinite(P.r(i)))
      throw DomainError("coefficients are not positive and finite at x = " + std::to_string(x));
    invp(i) = 1.0 / P.p(i);
  }
  P.SR = h2 * R.S * P.r.asDiagonal();
  P.u = h2 * (R.S * invp);
  P.K = h2 * R.S * invp.asDiagonal() * P.SR;
  P.cw.resize(n);
  for (int i = 0; i < n; ++i) P.cw(i) = h2 * R.wq[i];
  return P;
}

// Series terms eta_j, m_j on a panel given their values at the left edge.
void add_series(const ChebRule& R, Panel& P, const Eigen::VectorXd& eta0, const Eigen::VectorXd& m0) {
  const int n = R.n;
  const double h2 = 0.5 * (P.x1 - P.x0);
  P.eta.resize(n, kTerms + 1);
  P.m.resize(n, kTerms + 1);
  P.eta.col(0).setOnes();
  P.m.col(0).setZero();
  Eigen::VectorXd invp = P.p.cwiseInverse();
  for (int j = 1; j <= kTerms; ++j) {
    P.m.col(j) = Eigen::VectorXd::Constant(n, m0(j)) + P.SR * P.eta.col(j - 1);
    P.eta.col(j) = Eigen::VectorXd::Constant(n, eta0(j)) + h2 * (R.S * invp.cwiseProduct(P.m.col(j)));
  }
  P.S0 = P.eta(0, 1);
  P.S1 = P.eta(n - 1, 1);
}

double tail_of(const ChebRule& R, const Eigen::VectorXd& v) {
  Eigen::VectorXd c = R.to_coef * v;
  int n = R.n;
  return std::fabs(c(n - 1)) + std::fabs(c(n - 2));
}

double log_ratio(double a, double b) { return std::fabs(std::log(a / b)); }

// Appends panels until the right edge reaches `end`.
void grow(const OperatorSpec& op, PanelMesh& mesh, double end, bool exact_end) {
  const ChebRule& R = cheb_rule(mesh.n);
  const double lam = std::max(mesh.lam_max, 1.0);
  const bool graded = std::isfinite(mesh.a) && mesh.start > mesh.a;
  if (std::isfinite(op.b) && end >= op.b) throw DomainError("mesh end must lie below b");

  Eigen::VectorXd eta0 = Eigen::VectorXd::Zero(kTerms + 1), m0 = Eigen::VectorXd::Zero(kTerms + 1);
  eta0(0) = 1.0;
  bool series = true;
  if (!mesh.panels.empty()) {
    const Panel& L = mesh.panels.back();
    series = L.eta.size() > 0 && L.S1 <= 1.0;
    if (series) {
      eta0 = L.eta.row(mesh.n - 1).transpose();
      m0 = L.m.row(mesh.n - 1).transpose();
    }
  }

  for (int guard = 0; guard < 1000000; ++guard) {
    double x0 = mesh.end();
    if (exact_end ? x0 >= end : x0 >= end) break;
    double p0 = op.p(x0), r0 = op.r(x0);
    if (!usable(p0) || !usable(r0)) throw DomainError("coefficients unusable at x = " + std::to_string(x0));
    double sq0 = std::sqrt(p0 / r0);
    double w = 8.0 * sq0 / std::sqrt(lam);
    if (graded) w = std::min(w, x0 - mesh.a);
    if (std::isfinite(op.b)) w = std::min(w, 0.5 * (op.b - x0));
    if (exact_end) {
      double rem = end - x0;
      if (rem <= w) w = rem;
      else if (rem < 1.5 * w) w = 0.5 * rem;
    }
    Panel P;
    bool ok = false;
    for (int tries = 0; tries < 200; ++tries) {
      double x1 = (exact_end && w >= end - x0) ? end : x0 + w;
      double p1 = op.p(x1), r1 = op.r(x1), pm = op.p(0.5 * (x0 + x1)), rm = op.r(0.5 * (x0 + x1));
      bool good = usable(p1) && usable(r1) && usable(pm) && usable(rm);
      good = good && log_ratio(p1, p0) <= 4.0 && log_ratio(r1, r0) <= 4.0 && log_ratio(pm, p0) <= 4.0 &&
             log_ratio(rm, r0) <= 4.0;
      good = good && w <= 8.0 * std::sqrt(p1 / r1) / std::sqrt(lam);
      if (good) {
        P = make_panel(op, R, x0, x1);
        double tp = tail_of(R, P.p.cwiseInverse()) / P.p.cwiseInverse().cwiseAbs().maxCoeff();
        double tr = tail_of(R, P.r) / P.r.cwiseAbs().maxCoeff();
        good = tp <= 1e-13 && tr <= 1e-13;
        if (good && series) {
          add_series(R, P, eta0, m0);
          // The first panel must admit the series for every lambda of the mesh.
          if (mesh.panels.empty() && P.S1 * lam > 1.0) good = false;
        }
      }
      if (good) {
        ok = true;
        break;
      }
      w *= 0.5;
    }
    if (!ok) throw DomainError("cannot resolve coefficients near x = " + std::to_string(x0));
    if (series) {
      eta0 = P.eta.row(mesh.n - 1).transpose();
      m0 = P.m.row(mesh.n - 1).transpose();
      if (P.S1 > 1.0) series = false;
    }
    mesh.panels.push_back(std::move(P));
  }
}

template <class T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <class T>
double solve_ode(const OperatorSpec& op, const ChebRule& R, const Panel& P, T lam, T w0, T w10, T dw0, T dw10,
                 bool deriv, VecT<T>& w, VecT<T>& w1, VecT<T>& dw, VecT<T>& dw1, int depth) {
  const int n = R.n;
  MatT<T> K = P.K.template cast<T>();
  MatT<T> SR = P.SR.template cast<T>();
  VecT<T> u = P.u.template cast<T>();
  MatT<T> A = MatT<T>::Identity(n, n) + lam * K;
  Eigen::PartialPivLU<MatT<T>> lu(A);
  w = lu.solve(VecT<T>::Constant(n, w0) + w10 * u);
  w1 = VecT<T>::Constant(n, w10) - lam * (SR * w);
  if (deriv) {
    dw = lu.solve(-(K * w) + VecT<T>::Constant(n, dw0) + dw10 * u);
    dw1 = VecT<T>::Constant(n, dw10) - SR * (w + lam * dw);
  }
  double tail;
  if constexpr (std::is_same_v<T, double>) {
    tail = tail_of(R, w);
  } else {
    Eigen::VectorXd re = w.real(), im = w.imag();
    tail = tail_of(R, re) + tail_of(R, im);
  }
  double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if (tail <= 1e-12 * scale || depth >= 5) return tail;

  // Under-resolved: solve on two halves and read back at the original nodes.
  double mid = 0.5 * (P.x0 + P.x1);
  Panel L = make_panel(op, R, P.x0, mid), Rt = make_panel(op, R, mid, P.x1);
  VecT<T> lw, lw1, ldw, ldw1, rw, rw1, rdw, rdw1;
  double e1 = solve_ode(op, R, L, lam, w0, w10, dw0, dw10, deriv, lw, lw1, ldw, ldw1, depth + 1);
  double e2 = solve_ode(op, R, Rt, lam, lw(n - 1), lw1(n - 1), deriv ? ldw(n - 1) : T{}, deriv ? ldw1(n - 1) : T{},
                        deriv, rw, rw1, rdw, rdw1, depth + 1);
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) {
    double x = P.x(i);
    const Panel& H = x <= mid ? L : Rt;
    double t = 2.0 * (x - H.x0) / (H.x1 - H.x0) - 1.0;
    R.cardinal(std::clamp(t, -1.0, 1.0), c.data());
    const VecT<T>& sw = x <= mid ? lw : rw;
    const VecT<T>& sw1 = x <= mid ? lw1 : rw1;
    T a{}, b{}, da{}, db{};
    for (int j = 0; j < n; ++j) {
      a += c[j] * sw(j);
      b += c[j] * sw1(j);
      if (deriv) {
        da += c[j] * (x <= mid ? ldw(j) : rdw(j));
        db += c[j] * (x <= mid ? ldw1(j) : rdw1(j));
      }
    }
    w(i) = a;
    w1(i) = b;
    if (deriv) {
      dw(i) = da;
      dw1(i) = db;
    }
  }
  return e1 + e2;
}

template <class T>
struct SeriesSum {
  T w{}, w1{}, dw{}, dw1{};
};

template <class T>
SeriesSum<T> series_at(const Eigen::RowVectorXd& eta, const Eigen::RowVectorXd& m, T lam) {
  SeriesSum<T> s;
  s.w = T(1.0);
  T pw_prev = T(1.0);
  for (int j = 1; j <= kTerms; ++j) {
    T dcoef = -static_cast<double>(j) * pw_prev;
    T pw = -lam * pw_prev;
    s.w += pw * eta(j);
    s.w1 += pw * m(j);
    s.dw += dcoef * eta(j);
    s.dw1 += dcoef * m(j);
    pw_prev = pw;
  }
  return s;
}

double factorial_bound(double z, int k) {
  double v = 1.0;
  for (int j = 1; j <= k; ++j) v *= z / j;
  return v;
}

struct SignCounter {
  int last = 1, changes = 0, before_last = 0;
  template <class T>
  void add(const T& v) {
    before_last = changes;
    if constexpr (std::is_same_v<T, double>) {
      int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
      if (s == 0) return;
      if (s != last) ++changes;
      last = s;
    }
  }
};

}  // namespace

std::size_t PanelMesh::locate(double x) const {
  std::size_t lo = 0, hi = panels.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (panels[mid].x1 < x) lo = mid + 1;
    else hi = mid;
  }
  return std::min(lo, panels.size() - 1);
}

std::vector<double> PanelMesh::nodes() const {
  std::vector<double> v;
  v.reserve(node_count());
  for (const auto& P : panels)
    for (int i = 0; i < n; ++i) v.push_back(P.x(i));
  return v;
}

std::vector<double> PanelMesh::weights() const {
  std::vector<double> v;
  v.reserve(node_count());
  for (const auto& P : panels)
    for (int i = 0; i < n; ++i) v.push_back(P.cw(i));
  return v;
}

double effective_start(const OperatorSpec& op) {
  if (std::isfinite(op.a)) {
    double pa = op.p(op.a), ra = op.r(op.a);
    if (std::isfinite(pa) && std::isfinite(ra) && pa > 0.0 && ra > 0.0) return op.a;
    double scale = std::max(1.0, std::fabs(op.a));
    double c = std::isnan(op.c) ? op.default_c() : op.c;
    for (double eps = 1e-10 * scale; op.a + eps < c; eps *= 2.0) {
      double x = op.a + eps;
      if (usable(op.p(x)) && usable(op.r(x))) return x;
    }
    throw DomainError("coefficients unusable between a and the reference point");
  }
  double c = std::isnan(op.c) ? op.default_c() : op.c;
  double last = c;
  double step = 1.0;
  for (int k = 0; k < 40; ++k, step *= 2.0) {
    double x = c - step;
    if (!(usable(op.p(x)) && usable(op.r(x)))) break;
    last = x;
  }
  return last;
}

PanelMesh build_mesh(const OperatorSpec& op, double start, double end, double lam_max, bool exact_end) {
  if (!(end > start)) throw DomainError("mesh end must exceed its start");
  PanelMesh mesh;
  mesh.a = op.a;
  mesh.start = start;
  mesh.lam_max = std::max(lam_max, 1.0);
  mesh.n = kNodes;
  grow(op, mesh, end, exact_end);
  return mesh;
}

void extend_mesh(const OperatorSpec& op, PanelMesh& mesh, double end) { grow(op, mesh, end, false); }

template <class T>
SweepResult<T> sweep(const OperatorSpec& op, const PanelMesh& mesh, T lam, double x_end, bool deriv, T* wn, T* w1n) {
  const ChebRule& R = cheb_rule(mesh.n);
  const int n = mesh.n;
  if (x_end > mesh.end() * (1.0 + 1e-15) + 1e-300) throw DomainError("evaluation point beyond the mesh");
  SweepResult<T> res;
  T w0(1.0), w10{}, dw0{}, dw10{};
  const double alam = std::abs(lam);
  bool series = true;
  SignCounter sc;
  double err = 0.0;
  VecT<T> w, w1, dw, dw1;
  std::vector<double> card(n);

  for (std::size_t k = 0; k < mesh.panels.size(); ++k) {
    const Panel& P = mesh.panels[k];
    if (x_end <= P.x0) break;
    const bool partial = x_end < P.x1;
    const bool use_series = series && P.eta.size() > 0 && P.S1 * alam <= 1.0;
    if (!use_series) series = false;

    if (use_series) {
      err += factorial_bound(P.S1 * alam, kTerms + 1);
      if (partial) {
        double t = 2.0 * (x_end - P.x0) / (P.x1 - P.x0) - 1.0;
        R.cardinal(std::clamp(t, -1.0, 1.0), card.data());
        Eigen::Map<const Eigen::RowVectorXd> c(card.data(), n);
        Eigen::RowVectorXd er = c * P.eta, mr = c * P.m;
        auto s = series_at<T>(er, mr, lam);
        sc.add(s.w);
        res.w = s.w;
        res.w1 = s.w1;
        res.dw = s.dw;
        res.dw1 = s.dw1;
        res.sign_changes = sc.changes;
        res.interior_sign_changes = sc.before_last;
        res.est_error = err;
        return res;
      }
      w.resize(n);
      w1.resize(n);
      dw.resize(n);
      dw1.resize(n);
      for (int i = 0; i < n; ++i) {
        auto s = series_at<T>(P.eta.row(i), P.m.row(i), lam);
        w(i) = s.w;
        w1(i) = s.w1;
        dw(i) = s.dw;
        dw1(i) = s.dw1;
      }
    } else if (partial) {
      Panel Q = make_panel(op, R, P.x0, x_end);
      err += solve_ode<T>(op, R, Q, lam, w0, w10, dw0, dw10, deriv, w, w1, dw, dw1, 0);
      for (int i = 1; i < n; ++i) sc.add(w(i));
      res.w = w(n - 1);
      res.w1 = w1(n - 1);
      if (deriv) {
        res.dw = dw(n - 1);
        res.dw1 = dw1(n - 1);
      }
      res.sign_changes = sc.changes;
        res.interior_sign_changes = sc.before_last;
      res.est_error = err + 1e-15 * static_cast<double>(k + 1) * std::max(1.0, std::abs(res.w));
      return res;
    } else {
      err += solve_ode<T>(op, R, P, lam, w0, w10, dw0, dw10, deriv, w, w1, dw, dw1, 0);
    }
    for (int i = 1; i < n; ++i) sc.add(w(i));
    if (wn) for (int i = 0; i < n; ++i) wn[k * n + i] = w(i);
    if (w1n) for (int i = 0; i < n; ++i) w1n[k * n + i] = w1(i);
    w0 = w(n - 1);
    w10 = w1(n - 1);
    if (deriv) {
      dw0 = dw(n - 1);
      dw10 = dw1(n - 1);
    }
  }
  res.w = w0;
  res.w1 = w10;
  res.dw = dw0;
  res.dw1 = dw10;
  res.sign_changes = sc.changes;
        res.interior_sign_changes = sc.before_last;
  res.est_error = err + 1e-15 * static_cast<double>(mesh.panels.size()) * std::max(1.0, std::abs(w0));
  return res;
}

template SweepResult<double> sweep<double>(const OperatorSpec&, const PanelMesh&, double, double, bool, double*,
                                           double*);
template SweepResult<cplx> sweep<cplx>(const OperatorSpec&, const PanelMesh&, cplx, double, bool, cplx*, cplx*);

KernelTable tabulate(const OperatorSpec& op, std::shared_ptr<const PanelMesh> mesh, const std::vector<double>& lambdas,
                     bool with_w1) {
  KernelTable t;
  t.mesh = mesh;
  t.lambdas = lambdas;
  const auto nn = static_cast<Eigen::Index>(mesh->node_count());
  const auto K = static_cast<Eigen::Index>(lambdas.size());
  t.W.resize(nn, K);
  if (with_w1) t.W1.resize(nn, K);
  parallel_for(lambdas.size(), [&](std::size_t k) {
    sweep<double>(op, *mesh, lambdas[k], mesh->end(), false, t.W.col(static_cast<Eigen::Index>(k)).data(),
                  with_w1 ? t.W1.col(static_cast<Eigen::Index>(k)).data() : nullptr);
  });
  return t;
}

InterpPlan make_plan(const PanelMesh& mesh, double x) {
  InterpPlan plan;
  if (x <= mesh.start) {
    plan.exact_one = true;
    return plan;
  }
  if (x > mesh.end() * (1.0 + 1e-14) + 1e-300) throw DomainError("point " + std::to_string(x) + " lies beyond the tabulated range");
  const ChebRule& R = cheb_rule(mesh.n);
  std::size_t k = mesh.locate(x);
  const Panel& P = mesh.panels[k];
  double t = std::clamp(2.0 * (x - P.x0) / (P.x1 - P.x0) - 1.0, -1.0, 1.0);
  plan.offset = k * static_cast<std::size_t>(mesh.n);
  plan.weights.resize(mesh.n);
  R.cardinal(t, plan.weights.data());
  return plan;
}

double interp(const KernelTable& t, const InterpPlan& plan, std::size_t col) {
  if (plan.exact_one) return 1.0;
  auto n = plan.weights.size();
  return t.W.col(static_cast<Eigen::Index>(col)).segment(static_cast<Eigen::Index>(plan.offset), n).dot(plan.weights);
}

Eigen::VectorXd interp_all(const KernelTable& t, const InterpPlan& plan) {
  if (plan.exact_one) return Eigen::VectorXd::Ones(t.W.cols());
  return t.W.middleRows(static_cast<Eigen::Index>(plan.offset), plan.weights.size()).transpose() * plan.weights;
}

Eigen::VectorXd interp_all_w1(const KernelTable& t, const InterpPlan& plan) {
  if (t.W1.size() == 0) throw DomainError("table has no quasi-derivative values");
  if (plan.exact_one) return Eigen::VectorXd::Zero(t.W1.cols());
  return t.W1.middleRows(static_cast<Eigen::Index>(plan.offset), plan.weights.size()).transpose() * plan.weights;
}

Kernel::Kernel(const OperatorSpec& op)
    : op_(std::make_shared<const OperatorSpec>(op)), start_(effective_start(op)) {}

std::shared_ptr<const PanelMesh> Kernel::mesh_from(double start, double lam_max, double x) const {
  int bucket = static_cast<int>(std::ceil(std::log2(std::max(lam_max, 1.0))));
  std::lock_guard<std::mutex> lock(mu_);
  auto key = std::make_pair(start, bucket);
  auto it = cache_.find(key);
  if (it != cache_.end() && it->second->end() >= x) return it->second;
  auto mesh = it != cache_.end() ? std::make_shared<PanelMesh>(*it->second) : nullptr;
  if (!mesh) {
    mesh = std::make_shared<PanelMesh>();
    mesh->a = op_->a;
    mesh->start = start;
    mesh->lam_max = std::ldexp(1.0, bucket);
    mesh->n = kNodes;
  }
  extend_mesh(*op_, *mesh, x);
  cache_[key] = mesh;
  return mesh;
}

namespace {

KernelValue evaluate(const OperatorSpec& op, const PanelMesh& mesh, cplx lambda, double x) {
  KernelValue kv;
  kv.lambda = lambda;
  kv.x = x;
  if (lambda.imag() == 0.0) {
    auto s = sweep<double>(op, mesh, lambda.real(), x, false);
    kv.w = s.w;
    kv.w1 = s.w1;
    kv.est_error = s.est_error;
  } else {
    auto s = sweep<cplx>(op, mesh, lambda, x, false);
    kv.w = s.w;
    kv.w1 = s.w1;
    kv.est_error = s.est_error;
  }
  return kv;
}

}  // namespace

KernelValue Kernel::eval_w(cplx lambda, double x) const {
  const auto& op = *op_;
  if (!(x >= op.a && x < op.b)) throw DomainError("x = " + std::to_string(x) + " lies outside [a, b)");
  if (x <= start_) {
    KernelValue kv;
    kv.lambda = lambda;
    kv.x = x;
    kv.w = 1.0;
    kv.w1 = 0.0;
    return kv;
  }
  auto mesh = mesh_for(std::abs(lambda), x);
  return evaluate(op, *mesh, lambda, x);
}

KernelValue Kernel::eval_w_shifted(cplx lambda, double a_m, double x) const {
  const auto& op = *op_;
  if (!(a_m > op.a && a_m < op.b)) throw DomainError("shifted origin must lie inside (a, b)");
  if (!(x >= a_m && x < op.b)) throw DomainError("x must satisfy a_m <= x < b");
  if (x == a_m) {
    KernelValue kv;
    kv.lambda = lambda;
    kv.x = x;
    kv.w = 1.0;
    kv.w1 = 0.0;
    return kv;
  }
  auto mesh = mesh_from(a_m, std::abs(lambda), x);
  return evaluate(op, *mesh, lambda, x);
}

KappaShiftedOperator::KappaShiftedOperator(std::shared_ptr<const Kernel> base, double kappa, double x_max)
    : base_(std::move(base)), kappa_(kappa) {
  auto mesh = base_->mesh_for(std::max(std::fabs(kappa), 1.0), x_max);
  table_ = std::make_shared<KernelTable>(tabulate(base_->op(), mesh, {kappa}, true));
  auto tbl = table_;
  auto kern = base_;
  auto wk = [tbl, kern, kappa](double x) {
    if (x <= tbl->mesh->end()) return interp(*tbl, make_plan(*tbl->mesh, x), 0);
    return kern->w(kappa, x);
  };
  const auto& b = base_->op();
  mod_.name = b.name + "<kappa=" + std::to_string(kappa) + ">";
  mod_.a = b.a;
  mod_.b = b.b;
  mod_.c = b.c;
  auto bp = base_->op_ptr();
  mod_.p = Coefficient("w_kappa^2*p", [wk, bp](double x) {
    double v = wk(x);
    return v * v * bp->p(x);
  });
  mod_.r = Coefficient("w_kappa^2*r", [wk, bp](double x) {
    double v = wk(x);
    return v * v * bp->r(x);
  });
}

double KappaShiftedOperator::w_kappa(double x) const {
  if (x <= table_->mesh->end()) return interp(*table_, make_plan(*table_->mesh, x), 0);
  return base_->w(kappa_, x);
}

cplx KappaShiftedOperator::w_mod(cplx lambda, double x) const {
  return base_->eval_w(cplx(kappa_) + lambda, x).w / w_kappa(x);
}

KappaShiftedOperator kappa_shift(std::shared_ptr<const Kernel> base, double kappa, double sigma, double x_max) {
  if (kappa > sigma * sigma + 1e-12) throw DomainError("kappa must not exceed sigma^2");
  return KappaShiftedOperator(std::move(base), kappa, x_max);
}

BochnerReport bochner_check(const Kernel& k, double sigma, double x, double tau_max, int n) {
  if (n < 2) throw DomainError("bochner_check needs n >= 2");
  BochnerReport rep;
  double dt = tau_max / (n - 1);
  rep.samples.resize(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
    double tau = static_cast<double>(j) * dt;
    rep.samples[j] = k.w(tau * tau + sigma * sigma, x);
  });
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rep.samples[std::abs(i - j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.max_abs = 0.0;
  for (double g : rep.samples) rep.max_abs = std::max(rep.max_abs, std::fabs(g));
  rep.bound_ok = rep.max_abs <= 1.0 + 1e-9;
  return rep;
}

}  // namespace slhyper
