#include "slhyper/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "slhyper/errors.hpp"

namespace slhyper {
namespace {

// Stencil start for the interval [x_i, x_{i+1}] using four nodes.
std::size_t stencil_start(std::size_t i, std::size_t n) {
  if (n < 4) return 0;
  if (i == 0) return 0;
  if (i + 2 >= n) return n - 4;
  return i - 1;
}

void lagrange(const double* xs, int m, double t, double* out) {
  for (int j = 0; j < m; ++j) {
    double l = 1.0;
    for (int k = 0; k < m; ++k)
      if (k != j) l *= (t - xs[k]) / (xs[j] - xs[k]);
    out[j] = l;
  }
}

}  // namespace

GridFunction::GridFunction(std::vector<double> grid, std::vector<double> values)
    : x_(std::move(grid)), v_(std::move(values)) {
  if (x_.size() != v_.size()) throw DomainError("grid and values differ in length");
  if (x_.size() < 2) throw DomainError("grid function needs at least two nodes");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) throw DomainError("grid must be strictly increasing");

  std::size_t n = x_.size();
  qw_.assign(n, 0.0);
  const double g = 0.5 / std::sqrt(3.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double a = x_[i], b = x_[i + 1], h = b - a, mid = 0.5 * (a + b);
    if (n < 4) {
      qw_[i] += 0.5 * h;
      qw_[i + 1] += 0.5 * h;
      continue;
    }
    std::size_t s = stencil_start(i, n);
    double l1[4], l2[4];
    lagrange(&x_[s], 4, mid - g * h, l1);
    lagrange(&x_[s], 4, mid + g * h, l2);
    for (int j = 0; j < 4; ++j) qw_[s + j] += 0.5 * h * (l1[j] + l2[j]);
  }
}

GridFunction GridFunction::sample(const std::vector<double>& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
  return GridFunction(grid, std::move(v));
}

double GridFunction::operator()(double t) const {
  std::size_t n = x_.size();
  if (n == 0 || t < x_.front() || t > x_.back()) return 0.0;
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i >= n - 1) return v_[n - 1];
  if (t == x_[i]) return v_[i];
  if (n < 4) {
    double u = (t - x_[i]) / (x_[i + 1] - x_[i]);
    return (1 - u) * v_[i] + u * v_[i + 1];
  }
  std::size_t s = stencil_start(i, n);
  double l[4];
  lagrange(&x_[s], 4, t, l);
  return l[0] * v_[s] + l[1] * v_[s + 1] + l[2] * v_[s + 2] + l[3] * v_[s + 3];
}

double GridFunction::integrate() const {
  double s = 0.0;
  for (std::size_t i = 0; i < v_.size(); ++i) s += qw_[i] * v_[i];
  return s;
}

double GridFunction::integrate(const std::function<double(double)>& weight) const {
  double s = 0.0;
  for (std::size_t i = 0; i < v_.size(); ++i) s += qw_[i] * v_[i] * weight(x_[i]);
  return s;
}

void GridFunction::check_admissible() {
  double vmax = 0.0;
  for (double v : v_) vmax = std::max(vmax, std::fabs(v));
  compact_ = vmax == 0.0 || (std::fabs(v_.front()) <= 1e-10 * vmax && std::fabs(v_.back()) <= 1e-10 * vmax);
  // Second divided differences relative to the function scale; a jump shows
  // up as a value of order 1/h^2 which we reject.
  smooth2_ = true;
  if (v_.size() >= 3 && vmax > 0.0) {
    double span = x_.back() - x_.front();
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < v_.size(); ++i) {
      double h1 = x_[i] - x_[i - 1], h2 = x_[i + 1] - x_[i];
      double d2 = 2.0 * ((v_[i + 1] - v_[i]) / h2 - (v_[i] - v_[i - 1]) / h1) / (h1 + h2);
      double hloc = std::max(h1, h2);
      worst = std::max(worst, std::fabs(d2) * hloc * hloc / vmax);
    }
    double hmean = span / (v_.size() - 1);
    smooth2_ = worst < std::max(0.05, 50.0 * hmean * hmean);
  }
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  v[n - 1] = b;
  return v;
}

double bump(double x, double center, double halfwidth) {
  double u = (x - center) / halfwidth;
  if (std::fabs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

GridFunction read_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open grid file '" + path + "'");
  std::vector<double> xs, vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, v;
    if (!(ls >> x >> v)) continue;  // header or malformed row
    xs.push_back(x);
    vs.push_back(v);
  }
  if (xs.size() < 2) throw DomainError("grid file '" + path + "' has fewer than two rows");
  return GridFunction(std::move(xs), std::move(vs));
}

}  // namespace slhyper
