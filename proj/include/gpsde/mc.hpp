#pragma once
// Monte Carlo harness: replicated experiments over a decreasing noise ladder,
// with deterministic parallelism. Replication r of ladder entry e always draws
// from stream (e << 32 | r), and all reductions run in replication order, so
// reports are byte-identical for any worker count.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gpsde/common.hpp"
#include "gpsde/covariance.hpp"
#include "gpsde/estimator.hpp"
#include "gpsde/kernels.hpp"
#include "gpsde/sde.hpp"
#include "gpsde/stats.hpp"

namespace gpsde {

enum class ExperimentTarget { Consistency, RateDrift, RateMultiplier, Normality, GapBound };

inline std::string target_name(ExperimentTarget t) {
  switch (t) {
    case ExperimentTarget::Consistency: return "consistency";
    case ExperimentTarget::RateDrift: return "rate_drift";
    case ExperimentTarget::RateMultiplier: return "rate_multiplier";
    case ExperimentTarget::Normality: return "normality";
    default: return "gap_bound";
  }
}

// Every gate threshold in one place; the manifest echoes these.
struct McTolerances {
  double trend_se_mult = 2.0;    // monotone-trend slack, in combined SEs
  double ratio_factor = 2.0;     // rate gate: last ratio vs factor * max(earlier)
  double gap_se_mult = 3.0;      // mean gap bound slack, in combined SEs
  double mean_se_mult = 3.0;     // normality: |sample mean - predicted| in SEs
  double variance_rel = 0.25;    // normality: relative variance error
  double skew_max = 0.35;
  double exkurt_max = 0.7;
  double ecdf_coeff = 2.04;      // limit = coeff / sqrt(n_reps)
};

struct ExperimentPlan {
  ExperimentTarget target = ExperimentTarget::Consistency;
  SdeConfig sde;  // noise_scale is overridden by each ladder entry
  KernelFunction kernel;
  BandwidthRule rule;
  std::vector<double> epsilons;     // strictly decreasing, all in (0,1)
  int n_reps = 100;
  std::vector<double> eval_points;  // empty = derive from the window
  int n_eval = 21;
  double normality_point = 0.5;
  uint64_t seed = 1;
  bool override_resolution = false;
  McTolerances tol;

  void validate() const {
    sde.validate();
    if (target != ExperimentTarget::GapBound) kernel.validate();
    require(!epsilons.empty(), "experiment.epsilons must be non-empty");
    for (double e : epsilons)
      require(e > 0.0 && e < 1.0, "experiment.epsilons entries must be in (0,1)");
    for (size_t i = 0; i + 1 < epsilons.size(); ++i)
      require(epsilons[i + 1] < epsilons[i], "experiment.epsilons must be strictly decreasing");
    require(n_reps >= 1, "experiment.n_reps must be >= 1");
    require(n_eval >= 1, "experiment.n_eval must be >= 1");
    if (target == ExperimentTarget::Normality)
      require(n_reps >= 100, "normality experiments need n_reps >= 100");
    if (target == ExperimentTarget::RateMultiplier)
      require(sde.x0 > 0.0, "multiplier experiments need x0 > 0");
  }
};

struct GateResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct EpsilonRow {
  double epsilon = 0.0;
  double bandwidth = 0.0;
  bool resolution_ok = true;   // grid step <= bandwidth / 20
  bool ratio_reliable = true;  // epsilon >= 10 * grid step
  bool overhang = false;       // window collapsed; kernel cut by [0, horizon]
  std::vector<double> eval_points;
  std::vector<double> point_risk;     // per-point mean |estimate - truth|
  std::vector<double> point_risk_se;
  double sup_risk = 0.0;    // consistency: max of point means; rates: mean of per-rep maxima
  double sup_risk_se = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();  // sup_risk / epsilon
  double event_fail_rate = std::numeric_limits<double>::quiet_NaN();
  double event_fail_se = std::numeric_limits<double>::quiet_NaN();
  // gap-bound target
  double mean_sup_gap = std::numeric_limits<double>::quiet_NaN();
  double gap_se = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  double bound_se = std::numeric_limits<double>::quiet_NaN();
  double slack = std::numeric_limits<double>::quiet_NaN();
  long pathwise_violations = -1;  // gap-bound target: nodes violating the envelope
};

struct NormalityStats {
  double eval_point = 0.0;
  double epsilon = 0.0;
  double bandwidth = 0.0;
  std::vector<double> samples;  // normalized errors at the smallest epsilon
  double sample_mean = 0.0, se_mean = 0.0, sample_variance = 0.0;
  double predicted_mean = 0.0;    // drift-level derivative bias term
  double predicted_variance = 0.0;  // driver covariance at the point
  double skewness = 0.0, excess_kurtosis = 0.0;
  double ecdf_distance = 0.0, ecdf_limit = 0.0;
  bool pre_asymptotic = false;
};

struct McReport {
  ExperimentTarget target = ExperimentTarget::Consistency;
  std::vector<EpsilonRow> rows;
  std::optional<NormalityStats> normality;
  std::vector<GateResult> gates;
  uint64_t seed = 0;
  int threads = 1;
  int n_reps = 0;
  double wall_seconds = 0.0;  // excluded from CSV output
  McTolerances tol;
  std::vector<std::string> notes;

  bool all_pass() const {
    for (const auto& g : gates)
      if (!g.pass) return false;
    return true;
  }
};

// Static-free parallel loop with deterministic result placement: workers pull
// indices from a shared counter and write into caller-owned slots.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

// Truth values: the drift level multiplier(t) * ode(t), or the multiplier.
inline double truth_value(const ExperimentPlan& plan, ExperimentTarget target, double t) {
  if (target == ExperimentTarget::RateMultiplier) return plan.sde.trend(t);
  return plan.sde.trend(t) * plan.sde.x0 * std::exp(trend_integral(plan.sde.trend, t));
}

// The continuous extension of the shrinking evaluation window: when the
// bandwidth is so large that no admissible point remains, the window collapses
// to its limit point and the estimator is evaluated there with the kernel cut
// by the integration range [0, horizon].
inline Window consistency_window(const KernelFunction& kernel, double phi, double horizon,
                                 bool& overhang) {
  const double lo = -kernel.support_lo * phi;
  const double hi = horizon - kernel.support_hi * phi;
  if (lo <= hi) {
    overhang = false;
    return {lo, hi};
  }
  overhang = true;
  const double mid =
      -kernel.support_lo * horizon / (kernel.support_hi - kernel.support_lo);
  return {mid, mid};
}

// (k+1)-th derivative of the drift level J(t) = multiplier(t) * x(t), computed
// from the closed recursion x^(r+1) = sum C(r,j) m^(j) x^(r-j); since J = x',
// the requested derivative is x^(k+2).
inline double drift_level_derivative(const TrendFunction& trend, double x0, double t,
                                     int order) {
  require(order + 1 <= TrendFunction::kMaxDerivative + 1,
          "drift-level derivative order exceeds available trend derivatives");
  std::vector<double> x(order + 2);
  x[0] = x0 * std::exp(trend_integral(trend, t));
  for (int r = 0; r + 1 <= order + 1; ++r) {
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= r; ++j) {
      acc += binom * trend.derivative(j, t) * x[r - j];
      binom = binom * (r - j) / (j + 1.0);
    }
    x[r + 1] = acc;
  }
  return x[order + 1];
}

struct LadderGeometry {
  double bandwidth;
  Window window;
  bool overhang;
  bool resolution_ok;
};

inline LadderGeometry ladder_geometry(const ExperimentPlan& plan, double epsilon) {
  LadderGeometry g;
  g.bandwidth = resolve_bandwidth(plan.rule, epsilon);
  g.resolution_ok = plan.sde.grid.step() <= g.bandwidth / 20.0;
  if (!g.resolution_ok && !plan.override_resolution)
    throw config_error("grid resolution too coarse for bandwidth " + fmt_double(g.bandwidth) +
                       " at epsilon " + fmt_double(epsilon) +
                       " (pass the resolution override to proceed)");
  if (plan.target == ExperimentTarget::Consistency) {
    g.window = consistency_window(plan.kernel, g.bandwidth, plan.sde.grid.horizon, g.overhang);
  } else {
    g.overhang = false;
    g.window = effective_window(plan.kernel, g.bandwidth, plan.sde.grid.horizon);
  }
  return g;
}

inline EstimatorConfig estimator_for(const ExperimentPlan& plan, double epsilon,
                                     const LadderGeometry& g) {
  EstimatorConfig cfg;
  cfg.kernel = plan.kernel;
  cfg.noise_scale = epsilon;
  cfg.rule = BandwidthRule::explicit_phi(g.bandwidth);
  cfg.target = plan.target == ExperimentTarget::RateMultiplier ? EstimateTarget::Multiplier
                                                               : EstimateTarget::Drift;
  cfg.override_resolution = plan.override_resolution;
  cfg.allow_overhang = g.overhang;
  return cfg;
}

inline std::vector<double> resolve_eval_points(const ExperimentPlan& plan,
                                               const LadderGeometry& g) {
  if (!plan.eval_points.empty()) {
    for (double t : plan.eval_points)
      require(g.overhang || g.window.contains(t),
              "eval point " + fmt_double(t) + " outside the admissible window [" +
                  fmt_double(g.window.lo) + ", " + fmt_double(g.window.hi) + "]");
    return plan.eval_points;
  }
  return equispaced(g.window, plan.n_eval);
}

}  // namespace detail

// Consistency: per-ladder-entry windows (shrinking with the bandwidth), risk
// is the max over points of the mean absolute error. Gate: the sup-risk
// column decreases along the ladder, within trend_se_mult combined SEs.
inline McReport run_consistency_experiment(const ExperimentPlan& plan, int threads = 1) {
  plan.validate();
  const auto t0 = std::chrono::steady_clock::now();
  McReport report;
  report.target = ExperimentTarget::Consistency;
  report.seed = plan.seed;
  report.threads = threads;
  report.n_reps = plan.n_reps;
  report.tol = plan.tol;

  const PathSampler sampler(plan.sde.model, plan.sde.grid);
  for (size_t e = 0; e < plan.epsilons.size(); ++e) {
    const double eps = plan.epsilons[e];
    const auto geom = detail::ladder_geometry(plan, eps);
    EpsilonRow row;
    row.epsilon = eps;
    row.bandwidth = geom.bandwidth;
    row.resolution_ok = geom.resolution_ok;
    row.overhang = geom.overhang;
    row.ratio_reliable = eps >= 10.0 * plan.sde.grid.step();
    row.eval_points = geom.overhang ? std::vector<double>{geom.window.lo}
                                    : detail::resolve_eval_points(plan, geom);

    std::vector<double> truth(row.eval_points.size());
    for (size_t p = 0; p < truth.size(); ++p)
      truth[p] = detail::truth_value(plan, ExperimentTarget::RateDrift, row.eval_points[p]);

    SdeConfig sde = plan.sde;
    sde.noise_scale = eps;
    const EstimatorConfig cfg = detail::estimator_for(plan, eps, geom);

    const int np = static_cast<int>(row.eval_points.size());
    std::vector<std::vector<double>> abs_err(plan.n_reps, std::vector<double>(np));
    parallel_for(plan.n_reps, threads, [&](int r) {
      RngStream stream(plan.seed, (static_cast<uint64_t>(e) << 32) | static_cast<uint64_t>(r));
      const SdePath path = simulate(sde, sampler, stream);
      for (int p = 0; p < np; ++p)
        abs_err[r][p] = std::abs(estimate_drift(path, cfg, row.eval_points[p]) - truth[p]);
    });

    row.point_risk.resize(np);
    row.point_risk_se.resize(np);
    int arg = 0;
    for (int p = 0; p < np; ++p) {
      std::vector<double> per_rep(plan.n_reps);
      for (int r = 0; r < plan.n_reps; ++r) per_rep[r] = abs_err[r][p];
      const SampleStats s = sample_stats(per_rep);
      row.point_risk[p] = s.mean;
      row.point_risk_se[p] = s.se_mean;
      if (s.mean > row.point_risk[arg]) arg = p;
    }
    row.sup_risk = row.point_risk[arg];
    row.sup_risk_se = row.point_risk_se[arg];
    report.rows.push_back(std::move(row));
  }

  std::vector<double> risks, ses;
  for (const auto& r : report.rows) {
    risks.push_back(r.sup_risk);
    ses.push_back(r.sup_risk_se);
  }
  const bool ok = trend_decreasing(risks, ses, plan.tol.trend_se_mult);
  std::string detail = "sup-risk ladder:";
  for (double v : risks) detail += " " + fmt_double(v);
  report.gates.push_back({"consistency_trend", ok, detail});
  for (const auto& r : report.rows)
    if (r.overhang)
      report.notes.push_back("epsilon " + fmt_double(r.epsilon) +
                             ": window collapsed to its limit point; kernel cut by the "
                             "integration range");
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Rate experiments: fixed evaluation points (admissible across the whole
// ladder), risk is the mean over replications of the max-over-points error,
// ratio = risk / epsilon. Gate: the last ratio is at most ratio_factor times
// the max of the earlier ones. The multiplier variant also tracks how often
// the floor event failed, which must trend down along the ladder.
inline McReport run_rate_experiment(const ExperimentPlan& plan, int threads = 1) {
  plan.validate();
  require(plan.target == ExperimentTarget::RateDrift ||
              plan.target == ExperimentTarget::RateMultiplier,
          "rate experiment needs a rate target");
  const auto t0 = std::chrono::steady_clock::now();
  McReport report;
  report.target = plan.target;
  report.seed = plan.seed;
  report.threads = threads;
  report.n_reps = plan.n_reps;
  report.tol = plan.tol;

  // Points fixed across the ladder: intersect the per-entry windows, which for
  // monotone bandwidth rules is the window of the largest epsilon.
  Window common{0.0, plan.sde.grid.horizon};
  std::vector<detail::LadderGeometry> geoms;
  for (double eps : plan.epsilons) {
    geoms.push_back(detail::ladder_geometry(plan, eps));
    common.lo = std::max(common.lo, geoms.back().window.lo);
    common.hi = std::min(common.hi, geoms.back().window.hi);
  }
  require(common.lo <= common.hi, "no evaluation window admissible for every ladder entry");
  std::vector<double> points = plan.eval_points;
  if (points.empty()) points = equispaced(common, plan.n_eval);
  for (double t : points)
    require(common.contains(t), "eval point " + fmt_double(t) +
                                    " outside the common window [" + fmt_double(common.lo) +
                                    ", " + fmt_double(common.hi) + "]");

  const int np = static_cast<int>(points.size());
  std::vector<double> truth(np);
  for (int p = 0; p < np; ++p) truth[p] = detail::truth_value(plan, plan.target, points[p]);

  const PathSampler sampler(plan.sde.model, plan.sde.grid);
  for (size_t e = 0; e < plan.epsilons.size(); ++e) {
    const double eps = plan.epsilons[e];
    EpsilonRow row;
    row.epsilon = eps;
    row.bandwidth = geoms[e].bandwidth;
    row.resolution_ok = geoms[e].resolution_ok;
    row.ratio_reliable = eps >= 10.0 * plan.sde.grid.step();
    row.eval_points = points;

    SdeConfig sde = plan.sde;
    sde.noise_scale = eps;
    const EstimatorConfig cfg = detail::estimator_for(plan, eps, geoms[e]);

    std::vector<std::vector<double>> abs_err(plan.n_reps, std::vector<double>(np));
    std::vector<uint8_t> event_failed(plan.n_reps, 0);
    parallel_for(plan.n_reps, threads, [&](int r) {
      RngStream stream(plan.seed, (static_cast<uint64_t>(e) << 32) | static_cast<uint64_t>(r));
      const SdePath path = simulate(sde, sampler, stream);
      if (plan.target == ExperimentTarget::RateMultiplier && !path.event.back())
        event_failed[r] = 1;
      for (int p = 0; p < np; ++p)
        abs_err[r][p] = std::abs(estimate_at(path, cfg, points[p]) - truth[p]);
    });

    std::vector<double> maxima(plan.n_reps);
    for (int r = 0; r < plan.n_reps; ++r) {
      double m = 0.0;
      for (int p = 0; p < np; ++p) m = std::max(m, abs_err[r][p]);
      maxima[r] = m;
    }
    const SampleStats ms = sample_stats(maxima);
    row.sup_risk = ms.mean;
    row.sup_risk_se = ms.se_mean;
    row.ratio = ms.mean / eps;

    row.point_risk.resize(np);
    row.point_risk_se.resize(np);
    for (int p = 0; p < np; ++p) {
      std::vector<double> per_rep(plan.n_reps);
      for (int r = 0; r < plan.n_reps; ++r) per_rep[r] = abs_err[r][p];
      const SampleStats s = sample_stats(per_rep);
      row.point_risk[p] = s.mean;
      row.point_risk_se[p] = s.se_mean;
    }

    if (plan.target == ExperimentTarget::RateMultiplier) {
      int fails = 0;
      for (uint8_t f : event_failed) fails += f;
      const double p_hat = static_cast<double>(fails) / plan.n_reps;
      row.event_fail_rate = p_hat;
      row.event_fail_se = std::sqrt(p_hat * (1.0 - p_hat) / plan.n_reps);
    }
    report.rows.push_back(std::move(row));
  }

  if (report.rows.size() >= 2) {
    double max_earlier = 0.0;
    for (size_t i = 0; i + 1 < report.rows.size(); ++i)
      max_earlier = std::max(max_earlier, report.rows[i].ratio);
    const double last = report.rows.back().ratio;
    const bool ok = last <= plan.tol.ratio_factor * max_earlier;
    report.gates.push_back(
        {"rate_ratio_bounded", ok,
         "last ratio " + fmt_double(last) + " vs " + fmt_double(plan.tol.ratio_factor) +
             " * max(earlier) = " + fmt_double(plan.tol.ratio_factor * max_earlier)});
  } else {
    report.notes.push_back("single ladder entry: no ratio gate");
  }

  if (plan.target == ExperimentTarget::RateMultiplier) {
    std::vector<double> rates, ses;
    for (const auto& r : report.rows) {
      rates.push_back(r.event_fail_rate);
      ses.push_back(r.event_fail_se);
    }
    const bool ok = trend_decreasing(rates, ses, plan.tol.trend_se_mult);
    std::string detail = "event failure rates:";
    for (double v : rates) detail += " " + fmt_double(v);
    report.gates.push_back({"event_failure_trend", ok, detail});
  }

  for (const auto& r : report.rows)
    if (!r.ratio_reliable)
      report.notes.push_back("epsilon " + fmt_double(r.epsilon) +
                             " is within 10 grid steps of zero; ratio may be unreliable");
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Normality of the normalized error phi^-(k+1) * (estimate - truth) at one
// point, at the smallest epsilon of the ladder. The predicted center is the
// derivative bias term; the predicted spread is the driver covariance.
inline McReport run_normality_experiment(const ExperimentPlan& plan, int threads = 1) {
  plan.validate();
  require(plan.rule.kind == BandwidthRule::Kind::RateOrder,
          "normality experiments need the rate_order bandwidth rule");
  const int k = plan.rule.order;
  require(std::abs(kernel_moment(plan.kernel, k + 1)) > 1e-12,
          "normality experiments need kernel moment k+1 to be nonzero");
  const auto t0 = std::chrono::steady_clock::now();

  McReport report;
  report.target = ExperimentTarget::Normality;
  report.seed = plan.seed;
  report.threads = threads;
  report.n_reps = plan.n_reps;
  report.tol = plan.tol;

  const double t = plan.normality_point;
  const double truth = detail::truth_value(plan, ExperimentTarget::RateDrift, t);
  const PathSampler sampler(plan.sde.model, plan.sde.grid);

  for (size_t e = 0; e < plan.epsilons.size(); ++e) {
    const double eps = plan.epsilons[e];
    const auto geom = detail::ladder_geometry(plan, eps);
    require(geom.window.contains(t), "normality point " + fmt_double(t) +
                                         " outside the admissible window at epsilon " +
                                         fmt_double(eps));
    EpsilonRow row;
    row.epsilon = eps;
    row.bandwidth = geom.bandwidth;
    row.resolution_ok = geom.resolution_ok;
    row.ratio_reliable = eps >= 10.0 * plan.sde.grid.step();
    row.eval_points = {t};

    SdeConfig sde = plan.sde;
    sde.noise_scale = eps;
    const EstimatorConfig cfg = detail::estimator_for(plan, eps, geom);
    const double scale = std::pow(geom.bandwidth, -(k + 1));

    std::vector<double> w(plan.n_reps);
    parallel_for(plan.n_reps, threads, [&](int r) {
      RngStream stream(plan.seed, (static_cast<uint64_t>(e) << 32) | static_cast<uint64_t>(r));
      const SdePath path = simulate(sde, sampler, stream);
      w[r] = scale * (estimate_drift(path, cfg, t) - truth);
    });

    const SampleStats s = sample_stats(w);
    row.point_risk = {s.mean};
    row.point_risk_se = {s.se_mean};
    row.sup_risk = std::abs(s.mean);
    row.sup_risk_se = s.se_mean;
    report.rows.push_back(row);

    if (e + 1 == plan.epsilons.size()) {
      NormalityStats ns;
      ns.eval_point = t;
      ns.epsilon = eps;
      ns.bandwidth = geom.bandwidth;
      ns.samples = w;
      ns.sample_mean = s.mean;
      ns.se_mean = s.se_mean;
      ns.sample_variance = s.variance;
      ns.skewness = s.skewness;
      ns.excess_kurtosis = s.excess_kurtosis;
      const double jd = detail::drift_level_derivative(plan.sde.trend, plan.sde.x0, t, k + 1);
      double fact = 1.0;
      for (int i = 2; i <= k + 1; ++i) fact *= i;
      ns.predicted_mean = jd / fact * kernel_moment(plan.kernel, k + 1);
      ns.predicted_variance = covariance_at(plan.sde.model, t, t);
      ns.ecdf_limit = plan.tol.ecdf_coeff / std::sqrt(static_cast<double>(plan.n_reps));
      ns.ecdf_distance =
          ecdf_distance_vs_normal(w, ns.predicted_mean, std::sqrt(ns.predicted_variance));
      ns.pre_asymptotic = ns.ecdf_distance > ns.ecdf_limit;
      report.normality = ns;
    }
  }

  const NormalityStats& ns = *report.normality;
  report.gates.push_back({"normality_mean",
                          std::abs(ns.sample_mean - ns.predicted_mean) <=
                              plan.tol.mean_se_mult * ns.se_mean,
                          "sample mean " + fmt_double(ns.sample_mean) + " vs predicted " +
                              fmt_double(ns.predicted_mean) + " (se " + fmt_double(ns.se_mean) +
                              ")"});
  report.gates.push_back(
      {"normality_variance",
       std::abs(ns.sample_variance - ns.predicted_variance) <=
           plan.tol.variance_rel * ns.predicted_variance,
       "sample variance " + fmt_double(ns.sample_variance) + " vs predicted " +
           fmt_double(ns.predicted_variance) + " (rel tol " + fmt_double(plan.tol.variance_rel) +
           ")"});
  report.gates.push_back({"normality_skewness", std::abs(ns.skewness) <= plan.tol.skew_max,
                          "sample skewness " + fmt_double(ns.skewness)});
  report.gates.push_back(
      {"normality_kurtosis", std::abs(ns.excess_kurtosis) <= plan.tol.exkurt_max,
       "sample excess kurtosis " + fmt_double(ns.excess_kurtosis)});
  report.gates.push_back({"normality_ecdf", ns.ecdf_distance <= ns.ecdf_limit,
                          "ecdf distance " + fmt_double(ns.ecdf_distance) + " vs limit " +
                              fmt_double(ns.ecdf_limit)});
  if (ns.pre_asymptotic)
    report.notes.push_back("ecdf distance exceeds its limit: pre-asymptotic regime");
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Mean gap bound along the ladder, plus a pathwise envelope count: every node
// of every replication must stay inside the envelope up to the measured
// noise-free Euler slack.
inline McReport run_gap_bound_experiment(const ExperimentPlan& plan, int threads = 1) {
  plan.validate();
  const auto t0 = std::chrono::steady_clock::now();
  McReport report;
  report.target = ExperimentTarget::GapBound;
  report.seed = plan.seed;
  report.threads = threads;
  report.n_reps = plan.n_reps;
  report.tol = plan.tol;
  require(plan.n_reps >= 100, "gap-bound experiments need n_reps >= 100");

  const PathSampler sampler(plan.sde.model, plan.sde.grid);
  const int nodes = plan.sde.grid.n_nodes();
  SdeConfig noise_free = plan.sde;
  noise_free.noise_scale = 0.0;
  const double slack = euler_slack(noise_free);
  const double bound_L = plan.sde.trend.bound();

  for (size_t e = 0; e < plan.epsilons.size(); ++e) {
    const double eps = plan.epsilons[e];
    EpsilonRow row;
    row.epsilon = eps;
    row.bandwidth = std::numeric_limits<double>::quiet_NaN();
    row.slack = slack;

    SdeConfig sde = plan.sde;
    sde.noise_scale = eps;

    std::vector<std::vector<double>> gaps(plan.n_reps);
    std::vector<long> violations(plan.n_reps, 0);
    parallel_for(plan.n_reps, threads, [&](int r) {
      RngStream stream(plan.seed, (static_cast<uint64_t>(e) << 32) | static_cast<uint64_t>(r));
      const SdePath path = simulate(sde, sampler, stream);
      const GapEnvelope ge = pathwise_gap_bound(path, bound_L);
      gaps[r].resize(nodes);
      long bad = 0;
      for (int i = 0; i < nodes; ++i) {
        gaps[r][i] = ge.gap[i];
        if (ge.gap[i] > ge.envelope[i] + slack) ++bad;
      }
      violations[r] = bad;
    });

    long total_bad = 0;
    for (long v : violations) total_bad += v;
    row.pathwise_violations = total_bad;

    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < nodes; ++i) {
      double mean = 0.0;
      for (int r = 0; r < plan.n_reps; ++r) mean += gaps[r][i];
      mean /= plan.n_reps;
      if (mean > best) {
        best = mean;
        arg = i;
      }
    }
    std::vector<double> at_node(plan.n_reps);
    for (int r = 0; r < plan.n_reps; ++r) at_node[r] = gaps[r][arg];
    row.mean_sup_gap = best;
    row.gap_se = sample_stats(at_node).se_mean;

    const SupAbsEstimate sup =
        estimate_sup_abs(sampler, plan.n_reps, plan.seed,
                         (static_cast<uint64_t>(e) << 32) | (1ull << 20));
    const double amp = eps * std::exp(bound_L * plan.sde.grid.horizon);
    row.bound = amp * sup.mean;
    row.bound_se = amp * sup.se;

    const double comb =
        std::sqrt(row.gap_se * row.gap_se + row.bound_se * row.bound_se);
    const bool mean_ok = row.mean_sup_gap <= row.bound + plan.tol.gap_se_mult * comb + slack;
    report.gates.push_back({"mean_gap_bound_eps_" + fmt_double(eps), mean_ok,
                            "mean sup gap " + fmt_double(row.mean_sup_gap) + " vs bound " +
                                fmt_double(row.bound) + " + slack " + fmt_double(slack)});
    report.gates.push_back({"pathwise_envelope_eps_" + fmt_double(eps), total_bad == 0,
                            std::to_string(total_bad) + " node violations"});
    report.rows.push_back(std::move(row));
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

inline McReport run_experiment(const ExperimentPlan& plan, int threads = 1) {
  switch (plan.target) {
    case ExperimentTarget::Consistency: return run_consistency_experiment(plan, threads);
    case ExperimentTarget::RateDrift:
    case ExperimentTarget::RateMultiplier: return run_rate_experiment(plan, threads);
    case ExperimentTarget::Normality: return run_normality_experiment(plan, threads);
    default: return run_gap_bound_experiment(plan, threads);
  }
}

}  // namespace gpsde
