// Command-line front end. Subcommands: simulate, estimate, experiment, and
// kernels verify. Exit codes: 0 success, 1 failed gates or kernel conditions,
// 2 configuration errors, 3 numerical errors.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gpsde/gpsde.hpp"

namespace {

using gpsde::fmt_double;

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

gpsde::json tolerances_json(const gpsde::McTolerances& tol) {
  return gpsde::json{{"trend_se_mult", tol.trend_se_mult},
                     {"ratio_factor", tol.ratio_factor},
                     {"gap_se_mult", tol.gap_se_mult},
                     {"mean_se_mult", tol.mean_se_mult},
                     {"variance_rel", tol.variance_rel},
                     {"skew_max", tol.skew_max},
                     {"exkurt_max", tol.exkurt_max},
                     {"ecdf_coeff", tol.ecdf_coeff}};
}

gpsde::json report_manifest(const gpsde::McReport& report, const gpsde::json& config_echo) {
  gpsde::json rows = gpsde::json::array();
  for (const auto& r : report.rows) {
    gpsde::json row{{"epsilon", r.epsilon},
                    {"resolution_ok", r.resolution_ok},
                    {"ratio_reliable", r.ratio_reliable},
                    {"overhang", r.overhang}};
    if (std::isfinite(r.bandwidth)) row["bandwidth"] = r.bandwidth;
    if (!r.eval_points.empty())
      row["window"] = {r.eval_points.front(), r.eval_points.back()};
    rows.push_back(row);
  }
  gpsde::json gates = gpsde::json::array();
  for (const auto& g : report.gates)
    gates.push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
  return gpsde::json{{"target", gpsde::target_name(report.target)},
                     {"seed", report.seed},
                     {"threads", report.threads},
                     {"n_reps", report.n_reps},
                     {"ladder", rows},
                     {"gates", gates},
                     {"notes", report.notes},
                     {"all_pass", report.all_pass()},
                     {"wall_seconds", report.wall_seconds},
                     {"tolerances", tolerances_json(report.tol)},
                     {"config", config_echo}};
}

struct CliArgs {
  std::string config_file;
  std::string out = ".";
  uint64_t seed = 1;
  int threads = 1;
  bool override_resolution = false;
  std::string path_file;     // estimate: reuse a stored path instead of simulating
  std::string kernel_name;   // kernels verify
};

int cmd_simulate(const CliArgs& args) {
  const gpsde::RunConfig cfg = gpsde::load_config_file(args.config_file);
  const gpsde::SdePath path = gpsde::simulate(cfg.sde, args.seed);
  gpsde::write_path_csv(args.out, path);
  std::printf("wrote %s (%d nodes, epsilon %s)\n", args.out.c_str(), path.grid.n_nodes(),
              fmt_double(path.noise_scale).c_str());
  return 0;
}

int cmd_estimate(const CliArgs& args) {
  const gpsde::RunConfig cfg = gpsde::load_config_file(args.config_file);
  gpsde::require(cfg.has_kernel, "estimate needs a kernel section");
  gpsde::require(cfg.has_estimator, "estimate needs an estimator section");

  gpsde::SdePath path;
  if (!args.path_file.empty()) {
    path = gpsde::read_path_csv(args.path_file);
    path.noise_scale = cfg.sde.noise_scale;
  } else {
    path = gpsde::simulate(cfg.sde, args.seed);
  }

  gpsde::EstimatorConfig est;
  est.kernel = cfg.kernel;
  est.noise_scale = cfg.sde.noise_scale;
  est.rule = cfg.estimator.rule;
  est.target = cfg.estimator.target;
  est.override_resolution = args.override_resolution;
  est.allow_overhang = cfg.estimator.allow_overhang;

  gpsde::EstimateCurve curve;
  if (!cfg.estimator.eval_points.empty()) {
    curve.target = est.target;
    curve.kernel_name = est.kernel.name;
    curve.bandwidth = est.bandwidth();
    curve.noise_scale = est.noise_scale;
    curve.window = {cfg.estimator.eval_points.front(), cfg.estimator.eval_points.back()};
    curve.points = cfg.estimator.eval_points;
    for (double t : curve.points) curve.values.push_back(gpsde::estimate_at(path, est, t));
  } else {
    curve = gpsde::estimate_curve(path, est, cfg.estimator.n_eval);
  }
  gpsde::write_curve_csv(args.out, curve);
  std::printf("wrote %s (%zu points, bandwidth %s)\n", args.out.c_str(), curve.points.size(),
              fmt_double(curve.bandwidth).c_str());
  return 0;
}

int cmd_experiment(const CliArgs& args) {
  std::ifstream in(args.config_file);
  if (!in) throw gpsde::config_error("cannot open config file: " + args.config_file);
  gpsde::json root;
  try {
    root = gpsde::json::parse(in);
  } catch (const gpsde::json::parse_error& e) {
    throw gpsde::config_error("config is not valid JSON: " + std::string(e.what()));
  }
  const gpsde::RunConfig cfg = gpsde::parse_config(root);
  gpsde::require(cfg.has_experiment, "experiment needs an experiment section");
  gpsde::require(cfg.has_kernel || cfg.experiment.target == gpsde::ExperimentTarget::GapBound,
                 "experiment needs a kernel section");

  gpsde::ExperimentPlan plan;
  plan.target = cfg.experiment.target;
  plan.sde = cfg.sde;
  if (cfg.has_kernel) plan.kernel = cfg.kernel;
  gpsde::require(cfg.has_estimator || plan.target == gpsde::ExperimentTarget::GapBound,
                 "experiment needs an estimator section with a bandwidth rule");
  if (cfg.has_estimator) plan.rule = cfg.estimator.rule;
  plan.epsilons = cfg.experiment.epsilons;
  plan.n_reps = cfg.experiment.n_reps;
  plan.eval_points = cfg.experiment.eval_points;
  plan.n_eval = cfg.experiment.n_eval;
  plan.normality_point = cfg.experiment.normality_point;
  plan.seed = args.seed;
  plan.override_resolution = args.override_resolution;

  const gpsde::McReport report = gpsde::run_experiment(plan, args.threads);

  gpsde::write_report_csv(join_path(args.out, "report.csv"), report);
  if (report.normality)
    gpsde::write_clt_samples_csv(join_path(args.out, "clt_samples.csv"), report);
  gpsde::atomic_write_text(join_path(args.out, "manifest.json"),
                           report_manifest(report, root).dump(2) + "\n");

  for (const auto& g : report.gates)
    std::printf("[%s] %s: %s\n", g.pass ? "pass" : "FAIL", g.name.c_str(), g.detail.c_str());
  for (const auto& n : report.notes) std::printf("note: %s\n", n.c_str());
  std::printf("%s\n", report.all_pass() ? "all gates passed" : "some gates failed");
  return report.all_pass() ? 0 : 1;
}

int cmd_kernels_verify(const CliArgs& args) {
  const gpsde::KernelFunction k = gpsde::parse_kernel_name(args.kernel_name);
  const gpsde::KernelReport rep = gpsde::verify_conditions(k);
  std::printf("kernel %s on [%s, %s]\n", k.name.c_str(), fmt_double(k.support_lo).c_str(),
              fmt_double(k.support_hi).c_str());
  std::printf("  integrates to one: %s (error %s)\n", rep.mass_ok ? "yes" : "NO",
              fmt_double(rep.normalization_error).c_str());
  std::printf("  vanishes outside support: %s\n", rep.support_ok ? "yes" : "NO");
  std::printf("  vanishing-moment order: %d\n", rep.vanishing_order);
  for (size_t j = 0; j < rep.moments.size(); ++j)
    std::printf("  moment %zu: %s\n", j, fmt_double(rep.moments[j]).c_str());
  for (size_t j = 0; j < rep.abs_moments.size(); ++j)
    std::printf("  abs moment %zu: %s\n", j, fmt_double(rep.abs_moments[j]).c_str());
  std::printf("  l2 norm: %s\n", fmt_double(rep.l2).c_str());
  const bool ok = rep.mass_ok && rep.support_ok && rep.vanishing_order >= k.order;
  std::printf("%s\n", ok ? "all conditions hold" : "conditions violated");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process SDE simulation and kernel estimation lab"};
  app.require_subcommand(1);
  CliArgs args;

  auto* sim = app.add_subcommand("simulate", "simulate one path and write it as CSV");
  sim->add_option("--config", args.config_file, "JSON run configuration")->required();
  sim->add_option("--out", args.out, "output CSV file")->required();
  sim->add_option("--seed", args.seed, "RNG seed");

  auto* est = app.add_subcommand("estimate", "estimate a curve from a path and write it as CSV");
  est->add_option("--config", args.config_file, "JSON run configuration")->required();
  est->add_option("--out", args.out, "output CSV file")->required();
  est->add_option("--seed", args.seed, "RNG seed");
  est->add_option("--path", args.path_file, "read this path CSV instead of simulating");
  est->add_flag("--override-resolution", args.override_resolution,
                "evaluate even when the grid is coarse relative to the bandwidth");

  auto* exp = app.add_subcommand("experiment", "run a replicated experiment and write reports");
  exp->add_option("--config", args.config_file, "JSON run configuration")->required();
  exp->add_option("--out", args.out, "output directory (must exist)");
  exp->add_option("--seed", args.seed, "RNG seed");
  exp->add_option("--threads", args.threads, "worker thread count")
      ->check(CLI::Range(1, 256));
  exp->add_flag("--override-resolution", args.override_resolution,
                "evaluate even when the grid is coarse relative to the bandwidth");

  auto* kernels = app.add_subcommand("kernels", "kernel utilities");
  auto* verify = kernels->add_subcommand("verify", "check kernel conditions and print moments");
  verify->add_option("name", args.kernel_name, "kernel name (or order:k)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(args);
    if (est->parsed()) return cmd_estimate(args);
    if (exp->parsed()) return cmd_experiment(args);
    if (kernels->parsed() && verify->parsed()) return cmd_kernels_verify(args);
    std::fprintf(stderr, "no subcommand selected\n");
    return 2;
  } catch (const gpsde::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const gpsde::numerical_error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
