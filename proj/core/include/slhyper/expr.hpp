#pragma once

#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "slhyper/errors.hpp"

namespace slhyper {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

namespace detail {
struct Node;
using NodePtr = std::shared_ptr<const Node>;
}  // namespace detail

// A real function of one variable given by a small expression language:
// numbers, the variable, + - * / ^, parentheses, exp log sqrt sin cos sinh
// cosh tanh abs pow, constants pi and e.
class CoefficientExpr {
 public:
  CoefficientExpr();  // the constant 0

  static CoefficientExpr parse(std::string_view text, std::string_view var = "x",
                               Interval domain = {});
  static CoefficientExpr constant(double c, std::string_view var = "x");

  double operator()(double x) const { return eval(x); }
  double eval(double x) const;

  // Analytic derivative (every grammar element has a rule).
  CoefficientExpr derivative() const;
  double derivative_at(double x) const;
  // Central difference with step max(1e-6, 1e-6|x|), kept for cross-checks.
  double fd_derivative_at(double x) const;

  // Fully parenthesised text; parsing it back reproduces the evaluator.
  std::string to_string() const;
  const std::string& source() const { return source_; }
  const std::string& variable() const { return var_; }
  const Interval& domain() const { return domain_; }
  void set_domain(Interval d) { domain_ = d; }

  bool is_constant() const;
  // Returns the constant value when is_constant().
  double constant_value() const;

  // Throws DomainError if the expression is non-finite at one of n
  // log-spaced points of the declared domain.
  void probe(int n = 1000) const;

 private:
  struct Op {
    int code;
    double value;
  };
  void compile();
  static double run(const std::vector<Op>& prog, double x);

  std::string source_;
  std::string var_ = "x";
  Interval domain_;
  detail::NodePtr root_;
  std::vector<Op> prog_;
  std::vector<Op> dprog_;
};

// n points log-spaced toward both ends of the interval (or toward the
// finite end / infinity for half-infinite intervals).
std::vector<double> log_probe_points(const Interval& d, int n);

}  // namespace slhyper
