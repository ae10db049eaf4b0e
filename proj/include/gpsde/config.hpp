#pragma once
// Strict JSON run configuration. Every section has a closed key set; unknown
// keys are rejected by name so typos never silently fall back to defaults.

#include <fstream>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpsde/common.hpp"
#include "gpsde/covariance.hpp"
#include "gpsde/estimator.hpp"
#include "gpsde/kernels.hpp"
#include "gpsde/mc.hpp"
#include "gpsde/sde.hpp"
#include "gpsde/trend.hpp"

namespace gpsde {

using json = nlohmann::json;

namespace detail {

inline void check_keys(const json& obj, const std::string& section,
                       std::initializer_list<const char*> allowed) {
  require(obj.is_object(), "config section \"" + section + "\" must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (ok.find(it.key()) == ok.end())
      throw config_error("unknown key \"" + section + "." + it.key() + "\"");
}

inline const json& get_required(const json& obj, const std::string& section,
                                const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw config_error("missing key \"" + section + "." + key + "\"");
  return *it;
}

inline double get_number(const json& obj, const std::string& section, const std::string& key) {
  const json& v = get_required(obj, section, key);
  if (!v.is_number()) throw config_error("\"" + section + "." + key + "\" must be a number");
  return v.get<double>();
}

inline double get_number_or(const json& obj, const std::string& section, const std::string& key,
                            double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw config_error("\"" + section + "." + key + "\" must be a number");
  return it->get<double>();
}

inline int get_int(const json& obj, const std::string& section, const std::string& key) {
  const json& v = get_required(obj, section, key);
  if (!v.is_number_integer())
    throw config_error("\"" + section + "." + key + "\" must be an integer");
  return v.get<int>();
}

inline int get_int_or(const json& obj, const std::string& section, const std::string& key,
                      int fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer())
    throw config_error("\"" + section + "." + key + "\" must be an integer");
  return it->get<int>();
}

inline bool get_bool_or(const json& obj, const std::string& section, const std::string& key,
                        bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw config_error("\"" + section + "." + key + "\" must be a boolean");
  return it->get<bool>();
}

inline std::string get_string(const json& obj, const std::string& section,
                              const std::string& key) {
  const json& v = get_required(obj, section, key);
  if (!v.is_string()) throw config_error("\"" + section + "." + key + "\" must be a string");
  return v.get<std::string>();
}

inline std::vector<double> get_number_array(const json& obj, const std::string& section,
                                            const std::string& key) {
  const json& v = get_required(obj, section, key);
  if (!v.is_array()) throw config_error("\"" + section + "." + key + "\" must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number())
      throw config_error("\"" + section + "." + key + "\" entries must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace detail

inline CovarianceModel parse_model(const json& obj) {
  detail::check_keys(obj, "model", {"kind", "hurst", "bi_exponent"});
  const std::string kind = detail::get_string(obj, "model", "kind");
  const double h = detail::get_number(obj, "model", "hurst");
  require(h > 0.0 && h < 1.0, "model.hurst out of range (0,1)");
  if (kind == "fbm") return CovarianceModel::fractional(h);
  if (kind == "subfbm") return CovarianceModel::sub_fractional(h);
  if (kind == "bifbm") {
    const double k = detail::get_number(obj, "model", "bi_exponent");
    require(k > 0.0 && k <= 1.0, "model.bi_exponent out of range (0,1]");
    return CovarianceModel::bifractional(h, k);
  }
  throw config_error("model.kind must be one of fbm, subfbm, bifbm (got \"" + kind + "\")");
}

inline TrendFunction parse_trend(const json& obj, double horizon) {
  require(obj.is_object(), "config section \"trend\" must be an object");
  const std::string family = detail::get_string(obj, "trend", "family");
  if (family == "constant") {
    detail::check_keys(obj, "trend", {"family", "value"});
    return trend_constant(detail::get_number(obj, "trend", "value"));
  }
  if (family == "affine") {
    detail::check_keys(obj, "trend", {"family", "intercept", "slope"});
    return trend_affine(detail::get_number(obj, "trend", "intercept"),
                        detail::get_number(obj, "trend", "slope"), horizon);
  }
  if (family == "sine") {
    detail::check_keys(obj, "trend", {"family", "offset", "amplitude", "frequency", "phase"});
    return trend_sine(detail::get_number(obj, "trend", "offset"),
                      detail::get_number(obj, "trend", "amplitude"),
                      detail::get_number(obj, "trend", "frequency"),
                      detail::get_number_or(obj, "trend", "phase", 0.0));
  }
  if (family == "polynomial") {
    detail::check_keys(obj, "trend", {"family", "coefficients"});
    return trend_polynomial(detail::get_number_array(obj, "trend", "coefficients"), horizon);
  }
  if (family == "logistic") {
    detail::check_keys(obj, "trend", {"family", "offset", "scale", "rate", "midpoint"});
    return trend_logistic(detail::get_number(obj, "trend", "offset"),
                          detail::get_number(obj, "trend", "scale"),
                          detail::get_number(obj, "trend", "rate"),
                          detail::get_number(obj, "trend", "midpoint"), horizon);
  }
  throw config_error(
      "trend.family must be one of constant, affine, sine, polynomial, logistic (got \"" +
      family + "\")");
}

// Kernel spec: a builtin name or "order:k" for the constructed kernel of
// vanishing-moment order k.
inline KernelFunction parse_kernel_name(const std::string& name) {
  if (name.rfind("order:", 0) == 0) {
    const std::string digits = name.substr(6);
    require(!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos,
            "kernel order spec must look like order:2 (got \"" + name + "\")");
    return build_higher_order(std::stoi(digits));
  }
  return builtin_kernel(name);
}

inline KernelFunction parse_kernel(const json& obj) {
  detail::check_keys(obj, "kernel", {"name"});
  return parse_kernel_name(detail::get_string(obj, "kernel", "name"));
}

inline BandwidthRule parse_bandwidth(const json& obj, const std::string& section) {
  detail::check_keys(obj, section, {"rule", "phi", "order", "degree"});
  const std::string rule = detail::get_string(obj, section, "rule");
  if (rule == "explicit") {
    const double phi = detail::get_number(obj, section, "phi");
    require(phi > 0.0, section + ".phi must be > 0");
    return BandwidthRule::explicit_phi(phi);
  }
  if (rule == "rate_order") {
    const int k = detail::get_int(obj, section, "order");
    require(k >= 1 && k <= 10, section + ".order must be in [1,10]");
    return BandwidthRule::rate_order(k);
  }
  if (rule == "rate_degree") {
    const double rho = detail::get_number(obj, section, "degree");
    require(rho > 1.0, section + ".degree must be > 1");
    return BandwidthRule::rate_degree(rho);
  }
  throw config_error(section +
                     ".rule must be one of explicit, rate_order, rate_degree (got \"" + rule +
                     "\")");
}

struct EstimatorSpec {
  EstimateTarget target = EstimateTarget::Drift;
  BandwidthRule rule = BandwidthRule::explicit_phi(0.1);
  std::vector<double> eval_points;  // empty = equispaced over the window
  int n_eval = 21;
  bool allow_overhang = false;
};

inline EstimatorSpec parse_estimator(const json& obj) {
  detail::check_keys(obj, "estimator",
                     {"target", "bandwidth", "eval_points", "n_eval", "allow_overhang"});
  EstimatorSpec spec;
  const std::string target = detail::get_string(obj, "estimator", "target");
  if (target == "drift")
    spec.target = EstimateTarget::Drift;
  else if (target == "multiplier")
    spec.target = EstimateTarget::Multiplier;
  else
    throw config_error("estimator.target must be drift or multiplier (got \"" + target + "\")");
  spec.rule = parse_bandwidth(detail::get_required(obj, "estimator", "bandwidth"),
                              "estimator.bandwidth");
  if (obj.find("eval_points") != obj.end())
    spec.eval_points = detail::get_number_array(obj, "estimator", "eval_points");
  spec.n_eval = detail::get_int_or(obj, "estimator", "n_eval", 21);
  require(spec.n_eval >= 1, "estimator.n_eval must be >= 1");
  spec.allow_overhang = detail::get_bool_or(obj, "estimator", "allow_overhang", false);
  return spec;
}

struct ExperimentSpec {
  ExperimentTarget target = ExperimentTarget::Consistency;
  std::vector<double> epsilons;
  int n_reps = 100;
  std::vector<double> eval_points;
  int n_eval = 21;
  double normality_point = 0.5;
};

inline ExperimentSpec parse_experiment(const json& obj) {
  detail::check_keys(obj, "experiment",
                     {"target", "epsilons", "n_reps", "eval_points", "n_eval",
                      "normality_point"});
  ExperimentSpec spec;
  const std::string target = detail::get_string(obj, "experiment", "target");
  if (target == "consistency")
    spec.target = ExperimentTarget::Consistency;
  else if (target == "rate_drift")
    spec.target = ExperimentTarget::RateDrift;
  else if (target == "rate_multiplier")
    spec.target = ExperimentTarget::RateMultiplier;
  else if (target == "normality")
    spec.target = ExperimentTarget::Normality;
  else if (target == "gap_bound")
    spec.target = ExperimentTarget::GapBound;
  else
    throw config_error(
        "experiment.target must be one of consistency, rate_drift, rate_multiplier, "
        "normality, gap_bound (got \"" +
        target + "\")");
  spec.epsilons = detail::get_number_array(obj, "experiment", "epsilons");
  spec.n_reps = detail::get_int_or(obj, "experiment", "n_reps", 100);
  if (obj.find("eval_points") != obj.end())
    spec.eval_points = detail::get_number_array(obj, "experiment", "eval_points");
  spec.n_eval = detail::get_int_or(obj, "experiment", "n_eval", 21);
  spec.normality_point = detail::get_number_or(obj, "experiment", "normality_point", 0.5);
  return spec;
}

struct RunConfig {
  CovarianceModel model;
  TrendFunction trend;
  SdeConfig sde;
  bool has_kernel = false;
  KernelFunction kernel;
  bool has_estimator = false;
  EstimatorSpec estimator;
  bool has_experiment = false;
  ExperimentSpec experiment;
};

inline RunConfig parse_config(const json& root) {
  require(root.is_object(), "config root must be a JSON object");
  detail::check_keys(root, "config",
                     {"model", "trend", "sde", "kernel", "estimator", "experiment"});

  RunConfig cfg;
  const json& sde_obj = detail::get_required(root, "config", "sde");
  detail::check_keys(sde_obj, "sde", {"x0", "noise_scale", "horizon", "n_steps"});
  cfg.sde.grid.horizon = detail::get_number_or(sde_obj, "sde", "horizon", 1.0);
  cfg.sde.grid.n_steps = detail::get_int(sde_obj, "sde", "n_steps");
  cfg.sde.x0 = detail::get_number(sde_obj, "sde", "x0");
  cfg.sde.noise_scale = detail::get_number(sde_obj, "sde", "noise_scale");

  cfg.model = parse_model(detail::get_required(root, "config", "model"));
  cfg.trend = parse_trend(detail::get_required(root, "config", "trend"), cfg.sde.grid.horizon);
  cfg.sde.model = cfg.model;
  cfg.sde.trend = cfg.trend;
  cfg.sde.validate();

  if (root.find("kernel") != root.end()) {
    cfg.kernel = parse_kernel(root.at("kernel"));
    cfg.has_kernel = true;
  }
  if (root.find("estimator") != root.end()) {
    cfg.estimator = parse_estimator(root.at("estimator"));
    cfg.has_estimator = true;
  }
  if (root.find("experiment") != root.end()) {
    cfg.experiment = parse_experiment(root.at("experiment"));
    cfg.has_experiment = true;
  }
  return cfg;
}

inline RunConfig load_config_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw config_error("cannot open config file: " + file);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(root);
}

}  // namespace gpsde
