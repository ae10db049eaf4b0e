#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gpsde/estimator.hpp"
#include "gpsde/sde.hpp"

using namespace gpsde;

namespace {

EstimatorConfig drift_config(double phi) {
  EstimatorConfig cfg;
  cfg.kernel = builtin_kernel("epanechnikov");
  cfg.noise_scale = 0.1;
  cfg.rule = BandwidthRule::explicit_phi(phi);
  cfg.target = EstimateTarget::Drift;
  return cfg;
}

SdePath ramp_path(int n_steps) {
  // state(t) = t, so increments are exactly one grid step each.
  SdePath path;
  path.grid = TimeGrid{1.0, n_steps};
  path.state.resize(path.grid.n_nodes());
  for (int i = 0; i <= n_steps; ++i) path.state[i] = path.grid.node(i);
  path.x0 = 0.0;
  return path;
}

}  // namespace

TEST_CASE("bandwidth rules resolve to pinned values") {
  CHECK(resolve_bandwidth(BandwidthRule::explicit_phi(0.1), 0.5) == 0.1);
  CHECK(resolve_bandwidth(BandwidthRule::rate_order(1), 0.1) ==
        Catch::Approx(std::sqrt(0.1)).epsilon(1e-15));
  CHECK(resolve_bandwidth(BandwidthRule::rate_order(4), 0.1) ==
        Catch::Approx(std::pow(0.1, 0.2)).epsilon(1e-15));
  CHECK(resolve_bandwidth(BandwidthRule::rate_degree(2.0), 0.1) ==
        Catch::Approx(std::sqrt(0.1)).epsilon(1e-15));
  CHECK(resolve_bandwidth(BandwidthRule::rate_degree(2.5), 0.1) ==
        Catch::Approx(std::pow(0.1, 0.4)).epsilon(1e-15));
  CHECK_THROWS_AS(resolve_bandwidth(BandwidthRule::rate_order(1), 1.0), config_error);
  CHECK_THROWS_AS(resolve_bandwidth(BandwidthRule::rate_order(1), 0.0), config_error);
}

TEST_CASE("effective window shrinks with the bandwidth") {
  const KernelFunction epa = builtin_kernel("epanechnikov");
  const Window w = effective_window(epa, 0.1, 1.0);
  CHECK(w.lo == Catch::Approx(0.1));
  CHECK(w.hi == Catch::Approx(0.9));
  CHECK(w.contains(0.5));
  CHECK_FALSE(w.contains(0.05));
  CHECK_THROWS_WITH(effective_window(epa, 0.6, 1.0),
                    Catch::Matchers::ContainsSubstring("evaluation window is empty"));
}

TEST_CASE("a unit ramp estimates a flat drift level of one") {
  const SdePath path = ramp_path(1000);
  EstimatorConfig cfg = drift_config(0.2);
  for (double t : {0.3, 0.5, 0.7})
    CHECK(estimate_drift(path, cfg, t) == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("the estimator is linear in the path increments") {
  const SdePath base = ramp_path(400);
  SdePath doubled = base;
  for (double& x : doubled.state) x *= 3.0;
  EstimatorConfig cfg = drift_config(0.25);
  const double a = estimate_drift(base, cfg, 0.5);
  const double b = estimate_drift(doubled, cfg, 0.5);
  CHECK(b == Catch::Approx(3.0 * a).epsilon(1e-12));
}

TEST_CASE("noise-free drift estimate hits the true level") {
  SdeConfig sde;
  sde.x0 = 1.0;
  sde.noise_scale = 0.0;
  sde.trend = trend_constant(0.5);
  sde.model = CovarianceModel::fractional(0.5);
  sde.grid = TimeGrid{1.0, 2048};
  const SdePath path = simulate(sde, 1);
  EstimatorConfig cfg = drift_config(0.05);
  cfg.noise_scale = 0.0;
  const double truth = 0.5 * std::exp(0.25);
  CHECK(estimate_drift(path, cfg, 0.5) == Catch::Approx(truth).margin(0.01));
}

TEST_CASE("noise-free multiplier estimate hits the multiplier") {
  SdeConfig sde;
  sde.x0 = 1.0;
  sde.noise_scale = 0.0;
  sde.trend = trend_sine(0.3, 0.2, 1.0);
  sde.model = CovarianceModel::fractional(0.5);
  sde.grid = TimeGrid{1.0, 2048};
  const SdePath path = simulate(sde, 1);
  EstimatorConfig cfg = drift_config(0.05);
  cfg.noise_scale = 0.0;
  cfg.target = EstimateTarget::Multiplier;
  for (double t : {0.25, 0.5, 0.75})
    CHECK(estimate_multiplier(path, cfg, t) == Catch::Approx(sde.trend(t)).margin(0.01));
}

TEST_CASE("a lost event zeroes the multiplier estimate") {
  SdeConfig sde;
  sde.x0 = 1.0;
  sde.noise_scale = 0.0;
  sde.trend = trend_constant(0.2);
  sde.model = CovarianceModel::fractional(0.5);
  sde.grid = TimeGrid{1.0, 512};
  SdePath path = simulate(sde, 1);
  std::fill(path.event.begin(), path.event.end(), static_cast<uint8_t>(0));
  std::fill(path.obs_increments.begin(), path.obs_increments.end(), 0.0);
  EstimatorConfig cfg = drift_config(0.1);
  cfg.target = EstimateTarget::Multiplier;
  CHECK(estimate_multiplier(path, cfg, 0.5) == 0.0);
}

TEST_CASE("resolution guard trips and can be overridden") {
  const SdePath path = ramp_path(100);  // step 0.01 > phi/20 for phi = 0.1
  EstimatorConfig cfg = drift_config(0.1);
  CHECK_THROWS_MATCHES(estimate_drift(path, cfg, 0.5), config_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("override")));
  cfg.override_resolution = true;
  CHECK_NOTHROW(estimate_drift(path, cfg, 0.5));
}

TEST_CASE("boundary guard trips and overhang can be allowed") {
  const SdePath path = ramp_path(1000);
  EstimatorConfig cfg = drift_config(0.2);
  CHECK_THROWS_AS(estimate_drift(path, cfg, 0.05), config_error);
  cfg.allow_overhang = true;
  CHECK_NOTHROW(estimate_drift(path, cfg, 0.05));
}

TEST_CASE("equispaced points and degenerate windows") {
  const auto pts = equispaced({0.2, 0.8}, 4);
  REQUIRE(pts.size() == 4);
  CHECK(pts.front() == Catch::Approx(0.2));
  CHECK(pts.back() == Catch::Approx(0.8));
  const auto single = equispaced({0.5, 0.5}, 21);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 0.5);
}

TEST_CASE("curve evaluation covers the window") {
  const SdePath path = ramp_path(1000);
  EstimatorConfig cfg = drift_config(0.2);
  const EstimateCurve curve = estimate_curve(path, cfg, 11);
  REQUIRE(curve.points.size() == 11);
  CHECK(curve.window.lo == Catch::Approx(0.2));
  CHECK(curve.window.hi == Catch::Approx(0.8));
  CHECK(curve.points.front() == Catch::Approx(0.2));
  CHECK(curve.points.back() == Catch::Approx(0.8));
  for (double v : curve.values) CHECK(v == Catch::Approx(1.0).margin(1e-3));
}
