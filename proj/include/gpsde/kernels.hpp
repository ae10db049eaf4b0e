#pragma once
// Compactly supported averaging kernels: the classical built-ins plus a
// higher-order construction from Legendre polynomials with prescribed
// vanishing moments, and the condition checks the estimators rely on
// (unit mass, vanishing moments, compact support).

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gpsde/common.hpp"
#include "gpsde/quadrature.hpp"

namespace gpsde {

struct KernelFunction {
  std::string name = "uniform";
  double support_lo = -1.0;
  double support_hi = 1.0;
  int order = 1;  // largest m with vanishing moments 1..m
  std::function<double(double)> eval;  // raw shape; callers go through operator()

  double operator()(double u) const {
    if (u < support_lo || u > support_hi) return 0.0;
    return eval(u);
  }

  void validate() const {
    require(static_cast<bool>(eval), "kernel has no evaluation function");
    require(support_lo < support_hi, "kernel support must be a proper interval");
    require(order >= 1, "kernel order must be >= 1");
  }
};

inline int quadrature_points() { return 200; }

// Integrate over the support, splitting at zero when the support straddles
// it: the triangular shape and the |u|^j factors in absolute moments kink
// there, and Gauss-Legendre is only exact on pieces where the integrand is
// polynomial.
inline double kernel_support_integral(const KernelFunction& k,
                                      const std::function<double(double)>& f) {
  const auto& rule = gauss_legendre(quadrature_points());
  if (k.support_lo < 0.0 && k.support_hi > 0.0) {
    return rule.integrate(f, k.support_lo, 0.0) + rule.integrate(f, 0.0, k.support_hi);
  }
  return rule.integrate(f, k.support_lo, k.support_hi);
}

// j-th moment over the support; exact to machine precision for the
// piecewise-polynomial kernels shipped here.
inline double kernel_moment(const KernelFunction& k, int j) {
  k.validate();
  require(j >= 0, "moment order must be >= 0");
  return kernel_support_integral(k, [&](double u) { return std::pow(u, j) * k(u); });
}

inline double kernel_abs_moment(const KernelFunction& k, int j) {
  return kernel_support_integral(k,
                                 [&](double u) { return std::abs(std::pow(u, j) * k(u)); });
}

inline double kernel_l2(const KernelFunction& k) {
  return kernel_support_integral(k, [&](double u) { return k(u) * k(u); });
}

inline KernelFunction builtin_kernel(const std::string& name) {
  KernelFunction k;
  k.name = name;
  if (name == "uniform") {
    k.eval = [](double) { return 0.5; };
  } else if (name == "triangular") {
    k.eval = [](double u) { return 1.0 - std::abs(u); };
  } else if (name == "epanechnikov") {
    k.eval = [](double u) { return 0.75 * (1.0 - u * u); };
  } else {
    throw config_error("unknown kernel name: " + name);
  }
  k.order = 1;
  return k;
}

// Kernel of order >= k as a Legendre combination: solve the (k+1)-square
// moment system int u^j K = delta_{j0}, j = 0..k. Deterministic by
// construction; refuses k > 10 and ill-conditioned systems.
inline KernelFunction build_higher_order(int k, double support_lo = -1.0,
                                         double support_hi = 1.0) {
  require(k >= 1, "higher-order construction needs k >= 1");
  require(k <= 10, "higher-order construction supports k <= 10");
  require(support_lo < support_hi, "kernel support must be a proper interval");

  const int dim = k + 1;
  const double mid = 0.5 * (support_lo + support_hi);
  const double half = 0.5 * (support_hi - support_lo);
  auto basis = [mid, half](int i, double u) {
    return legendre_with_derivative(i, (u - mid) / half).first;
  };

  const GaussLegendre& rule = gauss_legendre(quadrature_points());
  Eigen::MatrixXd moments(dim, dim);  // row j: int u^j * basis_i(u) du
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i)
      moments(j, i) = rule.integrate(
          [&](double u) { return std::pow(u, j) * basis(i, u); }, support_lo, support_hi);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(moments, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond = svd.singularValues()(0) / svd.singularValues()(dim - 1);
  if (!(cond < 1e12))
    throw config_error("higher-order kernel system is ill-conditioned (cond " +
                       fmt_double(cond) + ")");

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs(0) = 1.0;
  const Eigen::VectorXd coeffs = svd.solve(rhs);

  std::vector<double> c(coeffs.data(), coeffs.data() + dim);
  KernelFunction out;
  out.name = "order:" + std::to_string(k);
  out.support_lo = support_lo;
  out.support_hi = support_hi;
  out.eval = [c, basis](double u) {
    double acc = 0.0;
    for (size_t i = 0; i < c.size(); ++i) acc += c[i] * basis(static_cast<int>(i), u);
    return acc;
  };
  out.order = 1;
  // Record the achieved order (parity can push it past k).
  for (int m = 1; m <= 12; ++m) {
    if (std::abs(kernel_moment(out, m)) > 1e-10) {
      out.order = m - 1;
      break;
    }
    out.order = m;
  }
  require(out.order >= k, "higher-order construction fell short of requested order");
  return out;
}

struct KernelReport {
  bool mass_ok = false;          // compact support and unit mass
  double normalization_error = 0.0;
  bool support_ok = false;       // vanishes outside the support (100 sample points)
  int vanishing_order = 0;       // largest m with moments 1..m all < 1e-10
  std::vector<double> moments;       // moments 0..vanishing_order+1
  std::vector<double> abs_moments;   // int |u^j K| for j = 0..vanishing_order+1
  double l2 = 0.0;
};

inline KernelReport verify_conditions(const KernelFunction& k) {
  k.validate();
  KernelReport rep;
  rep.normalization_error = std::abs(kernel_moment(k, 0) - 1.0);
  rep.mass_ok = rep.normalization_error <= 1e-12;

  rep.support_ok = true;
  const double width = k.support_hi - k.support_lo;
  for (int i = 0; i < 50; ++i) {
    const double below = k.support_lo - (i + 1) * width / 50.0;
    const double above = k.support_hi + (i + 1) * width / 50.0;
    if (k(below) != 0.0 || k(above) != 0.0) rep.support_ok = false;
  }
  rep.mass_ok = rep.mass_ok && rep.support_ok;

  rep.vanishing_order = 0;
  for (int m = 1; m <= 12; ++m) {
    if (std::abs(kernel_moment(k, m)) > 1e-10) break;
    rep.vanishing_order = m;
  }
  for (int j = 0; j <= rep.vanishing_order + 1; ++j) {
    rep.moments.push_back(kernel_moment(k, j));
    rep.abs_moments.push_back(kernel_abs_moment(k, j));
  }
  rep.l2 = kernel_l2(k);
  return rep;
}

}  // namespace gpsde
