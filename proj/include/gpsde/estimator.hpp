#pragma once
// Kernel-weighted local averages of path increments. The drift estimator
// targets the product multiplier(t) * ode(t); the multiplier estimator targets
// the multiplier itself through the gated relative increments.

#include <cmath>
#include <string>
#include <vector>

#include "gpsde/common.hpp"
#include "gpsde/kernels.hpp"
#include "gpsde/sde.hpp"

namespace gpsde {

struct BandwidthRule {
  enum class Kind { Explicit, RateOrder, RateDegree };
  Kind kind = Kind::Explicit;
  double phi = 0.1;     // Explicit
  int order = 1;        // RateOrder: phi = eps^(1/(order+1))
  double degree = 2.0;  // RateDegree: phi = eps^(1/degree)

  static BandwidthRule explicit_phi(double phi) { return {Kind::Explicit, phi, 1, 2.0}; }
  static BandwidthRule rate_order(int k) { return {Kind::RateOrder, 0.0, k, 2.0}; }
  static BandwidthRule rate_degree(double rho) { return {Kind::RateDegree, 0.0, 1, rho}; }

  std::string describe() const {
    switch (kind) {
      case Kind::Explicit: return "explicit(" + fmt_double(phi) + ")";
      case Kind::RateOrder: return "rate_order(" + std::to_string(order) + ")";
      default: return "rate_degree(" + fmt_double(degree) + ")";
    }
  }
};

inline double resolve_bandwidth(const BandwidthRule& rule, double noise_scale) {
  switch (rule.kind) {
    case BandwidthRule::Kind::Explicit:
      require(rule.phi > 0.0, "explicit bandwidth must be > 0");
      return rule.phi;
    case BandwidthRule::Kind::RateOrder:
      require(rule.order >= 1, "bandwidth rule order must be >= 1");
      require(noise_scale > 0.0 && noise_scale < 1.0,
              "rate bandwidth rules need epsilon in (0,1)");
      return std::pow(noise_scale, 1.0 / (rule.order + 1));
    default:
      require(rule.degree > 0.0, "bandwidth rule degree must be > 0");
      require(noise_scale > 0.0 && noise_scale < 1.0,
              "rate bandwidth rules need epsilon in (0,1)");
      return std::pow(noise_scale, 1.0 / rule.degree);
  }
}

struct Window {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double t) const { return t >= lo && t <= hi; }
};

// Evaluation times whose kernel window stays inside [0, horizon].
inline Window effective_window(const KernelFunction& kernel, double phi, double horizon) {
  kernel.validate();
  require(phi > 0.0, "bandwidth must be > 0");
  const double lo = -kernel.support_lo * phi;
  const double hi = horizon - kernel.support_hi * phi;
  if (!(lo <= hi))
    throw config_error("evaluation window is empty: bandwidth " + fmt_double(phi) +
                       " with support [" + fmt_double(kernel.support_lo) + ", " +
                       fmt_double(kernel.support_hi) + "] exceeds horizon " +
                       fmt_double(horizon));
  return {lo, hi};
}

enum class EstimateTarget { Drift, Multiplier };

struct EstimatorConfig {
  KernelFunction kernel;
  double noise_scale = 0.1;  // epsilon the path was simulated with
  BandwidthRule rule;
  EstimateTarget target = EstimateTarget::Drift;
  bool has_window = false;  // explicit window; otherwise the effective window is used
  Window window;
  bool override_resolution = false;  // accept grids coarser than phi/20
  bool allow_overhang = false;       // evaluate even if the kernel leaves [0, horizon]

  double bandwidth() const { return resolve_bandwidth(rule, noise_scale); }
};

namespace detail {

inline void check_resolution(const TimeGrid& grid, double phi, bool override_resolution) {
  if (grid.step() <= phi / 20.0) return;
  if (override_resolution) return;
  throw config_error("grid resolution too coarse for bandwidth: step " +
                     fmt_double(grid.step()) + " > phi/20 = " + fmt_double(phi / 20.0) +
                     " (pass the resolution override to proceed)");
}

inline void check_inside(const EstimatorConfig& cfg, double phi, double horizon, double t) {
  if (cfg.allow_overhang) return;
  const Window w = effective_window(cfg.kernel, phi, horizon);
  if (!w.contains(t))
    throw config_error("evaluation point " + fmt_double(t) + " outside the window [" +
                       fmt_double(w.lo) + ", " + fmt_double(w.hi) +
                       "]; the kernel would leave [0, horizon]");
}

}  // namespace detail

// Local average of raw state increments around t; estimates the drift level
// multiplier(t) * ode(t). The sum runs over [0, horizon] only, so with
// overhang explicitly allowed the kernel is cut by the integration range.
inline double estimate_drift(const SdePath& path, const EstimatorConfig& cfg, double t) {
  cfg.kernel.validate();
  const double phi = cfg.bandwidth();
  detail::check_resolution(path.grid, phi, cfg.override_resolution);
  detail::check_inside(cfg, phi, path.grid.horizon, t);
  if (cfg.has_window)
    require(cfg.window.contains(t), "evaluation point outside the configured window");

  double acc = 0.0;
  for (int i = 0; i < path.grid.n_steps; ++i) {
    const double w = cfg.kernel((path.grid.node(i) - t) / phi);
    if (w != 0.0) acc += w * (path.state[i + 1] - path.state[i]);
  }
  return acc / phi;
}

// Kernel average of the gated relative increments; estimates the multiplier
// itself. Gated twice: per-step increments carry the running event, and the
// whole estimate is zero when the event has failed by the horizon.
inline double estimate_multiplier(const SdePath& path, const EstimatorConfig& cfg, double t) {
  cfg.kernel.validate();
  require(!path.event.empty(), "path carries no event indicator; multiplier estimation "
                               "needs a simulated path with x0 > 0");
  const double phi = cfg.bandwidth();
  detail::check_resolution(path.grid, phi, cfg.override_resolution);
  detail::check_inside(cfg, phi, path.grid.horizon, t);
  if (cfg.has_window)
    require(cfg.window.contains(t), "evaluation point outside the configured window");

  if (!path.event.back()) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < path.grid.n_steps; ++i) {
    const double w = cfg.kernel((t - path.grid.node(i)) / phi);
    if (w != 0.0) acc += w * path.obs_increments[i];
  }
  return acc / phi;
}

inline double estimate_at(const SdePath& path, const EstimatorConfig& cfg, double t) {
  return cfg.target == EstimateTarget::Drift ? estimate_drift(path, cfg, t)
                                             : estimate_multiplier(path, cfg, t);
}

struct EstimateCurve {
  EstimateTarget target = EstimateTarget::Drift;
  std::string kernel_name;
  double bandwidth = 0.0;
  double noise_scale = 0.0;
  Window window;
  std::vector<double> points;
  std::vector<double> values;
};

inline std::vector<double> equispaced(const Window& w, int n) {
  require(n >= 1, "need at least one evaluation point");
  std::vector<double> pts(n);
  if (n == 1 || w.hi == w.lo) {
    pts.assign(n, 0.5 * (w.lo + w.hi));
    pts.resize(1);
    return pts;
  }
  for (int i = 0; i < n; ++i) pts[i] = w.lo + (w.hi - w.lo) * i / (n - 1);
  return pts;
}

inline EstimateCurve estimate_curve(const SdePath& path, const EstimatorConfig& cfg,
                                    int n_eval = 21) {
  const double phi = cfg.bandwidth();
  const Window w =
      cfg.has_window ? cfg.window : effective_window(cfg.kernel, phi, path.grid.horizon);
  EstimateCurve curve;
  curve.target = cfg.target;
  curve.kernel_name = cfg.kernel.name;
  curve.bandwidth = phi;
  curve.noise_scale = cfg.noise_scale;
  curve.window = w;
  curve.points = equispaced(w, n_eval);
  curve.values.reserve(curve.points.size());
  for (double t : curve.points) curve.values.push_back(estimate_at(path, cfg, t));
  return curve;
}

}  // namespace gpsde
