#pragma once

#include <functional>
#include <string>
#include <vector>

namespace slhyper {

// Sampled real function on a strictly increasing grid. Between nodes it is
// read through local cubic interpolation; outside the grid it is zero.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<double> grid, std::vector<double> values);

  static GridFunction sample(const std::vector<double>& grid, const std::function<double(double)>& f);

  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  std::size_t size() const { return x_.size(); }
  bool empty() const { return x_.empty(); }
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

  double operator()(double t) const;

  // Weights of the composite rule that integrates the local cubic interpolant.
  const std::vector<double>& quad_weights() const { return qw_; }
  double integrate() const;
  double integrate(const std::function<double(double)>& weight) const;

  // Admissibility flags; set only by check_admissible().
  bool compact_support() const { return compact_; }
  bool smooth2() const { return smooth2_; }
  // compact_support: both end values vanish (|v| <= 1e-10 max|v|) and the
  // function is zero outside; smooth2: normalised second differences stay bounded.
  void check_admissible();

 private:
  std::vector<double> x_, v_, qw_;
  bool compact_ = false, smooth2_ = false;
};

std::vector<double> linspace(double a, double b, int n);

// Smooth bump exp(-1/(1-u^2)) scaled to [center-halfwidth, center+halfwidth].
double bump(double x, double center, double halfwidth);

GridFunction read_grid_csv(const std::string& path);

}  // namespace slhyper
