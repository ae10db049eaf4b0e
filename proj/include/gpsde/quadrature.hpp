#pragma once
// Gauss-Legendre quadrature. Nodes and weights are computed once per order by
// Newton iteration on the Legendre recurrence and cached; a 200-point rule
// integrates polynomials up to degree 399 to machine precision, which is what
// the kernel moment checks rely on.

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "gpsde/common.hpp"

namespace gpsde {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;

  double integrate(const std::function<double(double)>& f, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(mid + half * nodes[i]);
    return acc * half;
  }
};

// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

inline const GaussLegendre& gauss_legendre(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  require(n >= 2, "quadrature order must be >= 2");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-style initial guess for the i-th root, then Newton.
    double x = std::cos(3.141592653589793238 * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      auto [p, dp] = legendre_with_derivative(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre_with_derivative(n, x);
    (void)p;
    rule.nodes[n - 1 - i] = x;  // cos() gives descending roots; store ascending
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  auto [ins, ok] = cache.emplace(n, std::move(rule));
  (void)ok;
  return ins->second;
}

// Composite Simpson over [0, t] with an even panel count; used for the
// deterministic limit x(t) = x0 * exp(integral of the trend).
inline double simpson_integral(const std::function<double(double)>& f, double t, int panels) {
  if (t == 0.0) return 0.0;
  if (panels % 2 != 0) ++panels;
  const double h = t / panels;
  double acc = f(0.0) + f(t);
  for (int i = 1; i < panels; ++i) acc += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace gpsde
