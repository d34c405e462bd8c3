#include "slhyper/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace slhyper {
namespace detail {

enum class K { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Fn };
enum class F { Exp, Log, Sqrt, Sin, Cos, Sinh, Cosh, Tanh, Abs, Sign };

struct Node {
  K kind;
  double value = 0.0;
  F fn = F::Exp;
  NodePtr a, b;
};

namespace {

NodePtr num(double v) { return std::make_shared<Node>(Node{K::Num, v, F::Exp, nullptr, nullptr}); }
NodePtr var() { return std::make_shared<Node>(Node{K::Var, 0.0, F::Exp, nullptr, nullptr}); }
bool is_num(const NodePtr& n, double v) { return n->kind == K::Num && n->value == v; }

const char* fn_name(F f) {
  switch (f) {
    case F::Exp: return "exp";
    case F::Log: return "log";
    case F::Sqrt: return "sqrt";
    case F::Sin: return "sin";
    case F::Cos: return "cos";
    case F::Sinh: return "sinh";
    case F::Cosh: return "cosh";
    case F::Tanh: return "tanh";
    case F::Abs: return "abs";
    case F::Sign: return "sign";
  }
  return "?";
}

double apply_fn(F f, double x) {
  switch (f) {
    case F::Exp: return std::exp(x);
    case F::Log: return std::log(x);
    case F::Sqrt: return std::sqrt(x);
    case F::Sin: return std::sin(x);
    case F::Cos: return std::cos(x);
    case F::Sinh: return std::sinh(x);
    case F::Cosh: return std::cosh(x);
    case F::Tanh: return std::tanh(x);
    case F::Abs: return std::fabs(x);
    case F::Sign: return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
  }
  return NAN;
}

double pow_real(double u, double v) {
  if (v == 2.0) return u * u;
  if (v == 1.0) return u;
  return std::pow(u, v);
}

// Builders with light constant folding so derivatives stay readable.
NodePtr neg(NodePtr a) {
  if (a->kind == K::Num) return num(-a->value);
  if (a->kind == K::Neg) return a->a;
  return std::make_shared<Node>(Node{K::Neg, 0.0, F::Exp, a, nullptr});
}
NodePtr bin(K k, NodePtr a, NodePtr b) {
  if (a->kind == K::Num && b->kind == K::Num) {
    switch (k) {
      case K::Add: return num(a->value + b->value);
      case K::Sub: return num(a->value - b->value);
      case K::Mul: return num(a->value * b->value);
      case K::Div: if (b->value != 0.0) return num(a->value / b->value); break;
      case K::Pow: return num(pow_real(a->value, b->value));
      default: break;
    }
  }
  switch (k) {
    case K::Add:
      if (is_num(a, 0)) return b;
      if (is_num(b, 0)) return a;
      break;
    case K::Sub:
      if (is_num(b, 0)) return a;
      if (is_num(a, 0)) return neg(b);
      break;
    case K::Mul:
      if (is_num(a, 0) || is_num(b, 0)) return num(0);
      if (is_num(a, 1)) return b;
      if (is_num(b, 1)) return a;
      break;
    case K::Div:
      if (is_num(a, 0)) return num(0);
      if (is_num(b, 1)) return a;
      break;
    case K::Pow:
      if (is_num(b, 0)) return num(1);
      if (is_num(b, 1)) return a;
      break;
    default: break;
  }
  return std::make_shared<Node>(Node{k, 0.0, F::Exp, a, b});
}
NodePtr fn(F f, NodePtr a) {
  if (a->kind == K::Num) return num(apply_fn(f, a->value));
  return std::make_shared<Node>(Node{K::Fn, 0.0, f, a, nullptr});
}

bool depends_on_var(const NodePtr& n) {
  if (!n) return false;
  if (n->kind == K::Var) return true;
  return depends_on_var(n->a) || depends_on_var(n->b);
}

NodePtr diff(const NodePtr& n) {
  switch (n->kind) {
    case K::Num: return num(0);
    case K::Var: return num(1);
    case K::Neg: return neg(diff(n->a));
    case K::Add: return bin(K::Add, diff(n->a), diff(n->b));
    case K::Sub: return bin(K::Sub, diff(n->a), diff(n->b));
    case K::Mul:
      return bin(K::Add, bin(K::Mul, diff(n->a), n->b), bin(K::Mul, n->a, diff(n->b)));
    case K::Div:
      return bin(K::Div,
                 bin(K::Sub, bin(K::Mul, diff(n->a), n->b), bin(K::Mul, n->a, diff(n->b))),
                 bin(K::Pow, n->b, num(2)));
    case K::Pow: {
      const NodePtr& u = n->a;
      const NodePtr& v = n->b;
      if (!depends_on_var(v)) {
        return bin(K::Mul, bin(K::Mul, v, bin(K::Pow, u, bin(K::Sub, v, num(1)))), diff(u));
      }
      NodePtr t = bin(K::Add, bin(K::Mul, diff(v), fn(F::Log, u)),
                      bin(K::Div, bin(K::Mul, v, diff(u)), u));
      return bin(K::Mul, n, t);
    }
    case K::Fn: {
      const NodePtr& u = n->a;
      NodePtr du = diff(u);
      NodePtr outer;
      switch (n->fn) {
        case F::Exp: outer = n; break;
        case F::Log: outer = bin(K::Div, num(1), u); break;
        case F::Sqrt: outer = bin(K::Div, num(0.5), n); break;
        case F::Sin: outer = fn(F::Cos, u); break;
        case F::Cos: outer = neg(fn(F::Sin, u)); break;
        case F::Sinh: outer = fn(F::Cosh, u); break;
        case F::Cosh: outer = fn(F::Sinh, u); break;
        case F::Tanh: outer = bin(K::Sub, num(1), bin(K::Pow, n, num(2))); break;
        case F::Abs: outer = fn(F::Sign, u); break;
        case F::Sign: outer = num(0); break;
      }
      return bin(K::Mul, outer, du);
    }
  }
  return num(0);
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (v < 0) return "(" + s + ")";
  return s;
}

void print(const NodePtr& n, const std::string& var, std::ostringstream& os) {
  switch (n->kind) {
    case K::Num: os << fmt_num(n->value); return;
    case K::Var: os << var; return;
    case K::Neg: os << "(-"; print(n->a, var, os); os << ")"; return;
    case K::Fn: os << fn_name(n->fn) << "("; print(n->a, var, os); os << ")"; return;
    default: break;
  }
  const char* op = n->kind == K::Add ? "+" : n->kind == K::Sub ? "-" : n->kind == K::Mul ? "*"
                 : n->kind == K::Div ? "/" : "^";
  os << "(";
  print(n->a, var, os);
  os << op;
  print(n->b, var, os);
  os << ")";
}

class Parser {
 public:
  Parser(std::string_view s, std::string_view var) : s_(s), var_(var) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ < s_.size()) {
      throw ParseError(std::string("unexpected character '") + s_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    skip();
    if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "' before end of input", pos_);
    if (s_[pos_] != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = raw(K::Add, lhs, term());
      else if (accept('-')) lhs = raw(K::Sub, lhs, term());
      else return lhs;
    }
  }
  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = raw(K::Mul, lhs, unary());
      else if (accept('/')) lhs = raw(K::Div, lhs, unary());
      else return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) return std::make_shared<Node>(Node{K::Neg, 0.0, F::Exp, unary(), nullptr});
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return raw(K::Pow, base, unary());
    return base;
  }
  static NodePtr raw(K k, NodePtr a, NodePtr b) {
    return std::make_shared<Node>(Node{k, 0.0, F::Exp, std::move(a), std::move(b)});
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t d0 = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return pos_ - d0;
    };
    std::size_t nd = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) throw ParseError("malformed number", start);
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // "2e" followed by something else: treat e separately
    }
    std::string tok(s_.substr(start, pos_ - start));
    return num(std::strtod(tok.c_str(), nullptr));
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string id(s_.substr(start, pos_ - start));
    skip();
    bool call = pos_ < s_.size() && s_[pos_] == '(';
    if (!call) {
      if (id == var_) return var();
      if (id == "pi") return num(std::numbers::pi);
      if (id == "e") return num(std::numbers::e);
      throw ParseError("unknown identifier '" + id + "'", start);
    }
    static const std::pair<const char*, F> table[] = {
        {"exp", F::Exp},   {"log", F::Log},   {"sqrt", F::Sqrt}, {"sin", F::Sin},
        {"cos", F::Cos},   {"sinh", F::Sinh}, {"cosh", F::Cosh}, {"tanh", F::Tanh},
        {"abs", F::Abs},   {"sign", F::Sign}};
    ++pos_;  // '('
    if (id == "pow") {
      NodePtr a = expr();
      expect(',');
      NodePtr b = expr();
      expect(')');
      return raw(K::Pow, a, b);
    }
    for (const auto& [name, f] : table) {
      if (id == name) {
        NodePtr a = expr();
        expect(')');
        return std::make_shared<Node>(Node{K::Fn, 0.0, f, a, nullptr});
      }
    }
    throw ParseError("unknown function '" + id + "'", start);
  }

  std::string_view s_;
  std::string var_;
  std::size_t pos_ = 0;
};

enum Code { C_PUSH, C_VAR, C_NEG, C_ADD, C_SUB, C_MUL, C_DIV, C_POW, C_POWC, C_FN };

template <class Op>
void emit(const NodePtr& n, std::vector<Op>& out) {
  switch (n->kind) {
    case K::Num: out.push_back({C_PUSH, n->value}); return;
    case K::Var: out.push_back({C_VAR, 0.0}); return;
    case K::Neg: emit(n->a, out); out.push_back({C_NEG, 0.0}); return;
    case K::Fn: emit(n->a, out); out.push_back({C_FN, static_cast<double>(static_cast<int>(n->fn))}); return;
    case K::Pow:
      if (n->b->kind == K::Num) {
        emit(n->a, out);
        out.push_back({C_POWC, n->b->value});
        return;
      }
      break;
    default: break;
  }
  emit(n->a, out);
  emit(n->b, out);
  int code = n->kind == K::Add ? C_ADD : n->kind == K::Sub ? C_SUB : n->kind == K::Mul ? C_MUL
           : n->kind == K::Div ? C_DIV : C_POW;
  out.push_back({code, 0.0});
}

}  // namespace
}  // namespace detail

using namespace detail;

CoefficientExpr::CoefficientExpr() : source_("0"), root_(num(0)) { compile(); }

CoefficientExpr CoefficientExpr::parse(std::string_view text, std::string_view var, Interval domain) {
  CoefficientExpr e;
  e.source_ = std::string(text);
  e.var_ = std::string(var);
  e.domain_ = domain;
  e.root_ = Parser(text, var).parse();
  e.compile();
  return e;
}

CoefficientExpr CoefficientExpr::constant(double c, std::string_view var) {
  CoefficientExpr e;
  e.var_ = std::string(var);
  e.root_ = num(c);
  e.source_ = fmt_num(c);
  e.compile();
  return e;
}

void CoefficientExpr::compile() {
  prog_.clear();
  dprog_.clear();
  emit(root_, prog_);
  emit(diff(root_), dprog_);
}

double CoefficientExpr::run(const std::vector<Op>& prog, double x) {
  double stack[64] = {};
  std::vector<double> heap;
  double* st = stack;
  if (prog.size() > 64) {
    heap.resize(prog.size());
    st = heap.data();
  }
  int sp = 0;
  for (const Op& op : prog) {
    switch (op.code) {
      case C_PUSH: st[sp++] = op.value; break;
      case C_VAR: st[sp++] = x; break;
      case C_NEG: st[sp - 1] = -st[sp - 1]; break;
      case C_ADD: --sp; st[sp - 1] += st[sp]; break;
      case C_SUB: --sp; st[sp - 1] -= st[sp]; break;
      case C_MUL: --sp; st[sp - 1] *= st[sp]; break;
      case C_DIV: --sp; st[sp - 1] /= st[sp]; break;
      case C_POW: --sp; st[sp - 1] = pow_real(st[sp - 1], st[sp]); break;
      case C_POWC: st[sp - 1] = pow_real(st[sp - 1], op.value); break;
      case C_FN: st[sp - 1] = apply_fn(static_cast<F>(static_cast<int>(op.value)), st[sp - 1]); break;
    }
  }
  return st[0];
}

double CoefficientExpr::eval(double x) const { return run(prog_, x); }

double CoefficientExpr::derivative_at(double x) const { return run(dprog_, x); }

double CoefficientExpr::fd_derivative_at(double x) const {
  double h = std::max(1e-6, 1e-6 * std::fabs(x));
  return (eval(x + h) - eval(x - h)) / (2.0 * h);
}

CoefficientExpr CoefficientExpr::derivative() const {
  CoefficientExpr d;
  d.var_ = var_;
  d.domain_ = domain_;
  d.root_ = diff(root_);
  std::ostringstream os;
  print(d.root_, var_, os);
  d.source_ = os.str();
  d.compile();
  return d;
}

std::string CoefficientExpr::to_string() const {
  std::ostringstream os;
  print(root_, var_, os);
  return os.str();
}

bool CoefficientExpr::is_constant() const { return !depends_on_var(root_); }

double CoefficientExpr::constant_value() const { return eval(0.0); }

void CoefficientExpr::probe(int n) const {
  for (double x : log_probe_points(domain_, n)) {
    double v = eval(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os.precision(17);
      os << "expression '" << source_ << "' is not finite at " << var_ << "=" << x;
      throw DomainError(os.str());
    }
  }
}

std::vector<double> log_probe_points(const Interval& d, int n) {
  std::vector<double> pts;
  if (n < 2) n = 2;
  pts.reserve(n);
  bool lo_fin = std::isfinite(d.lo), hi_fin = std::isfinite(d.hi);
  if (lo_fin && hi_fin) {
    // half the points clustered toward each end
    double w = d.hi - d.lo;
    int h = n / 2;
    for (int i = 0; i < h; ++i) {
      double t = std::pow(10.0, -8.0 + 7.69897 * i / (h - 1));  // 1e-8 .. 0.5
      pts.push_back(d.lo + w * t);
    }
    for (int i = n - h - 1; i >= 0; --i) {
      double t = std::pow(10.0, -8.0 + 7.69897 * i / std::max(1, n - h - 1));
      pts.push_back(d.hi - w * t);
    }
  } else if (lo_fin) {
    for (int i = 0; i < n; ++i) pts.push_back(d.lo + std::pow(10.0, -6.0 + 12.0 * i / (n - 1)));
  } else if (hi_fin) {
    for (int i = 0; i < n; ++i) pts.push_back(d.hi - std::pow(10.0, 6.0 - 12.0 * i / (n - 1)));
  } else {
    int h = n / 2;
    for (int i = 0; i < h; ++i) pts.push_back(-std::pow(10.0, 6.0 - 12.0 * i / (h - 1)));
    for (int i = 0; i < n - h; ++i) pts.push_back(std::pow(10.0, -6.0 + 12.0 * i / std::max(1, n - h - 1)));
  }
  return pts;
}

}  // namespace slhyper
