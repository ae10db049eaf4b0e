#pragma once
// CSV and text output with byte-stable number formatting and atomic writes
// (temp file + rename), plus a path reader that validates the schema.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gpsde/common.hpp"
#include "gpsde/estimator.hpp"
#include "gpsde/mc.hpp"
#include "gpsde/sde.hpp"

namespace gpsde {

inline void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw config_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw config_error("cannot move " + tmp + " into place: " + std::strerror(errno));
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace detail {

inline std::string csv_cell(double x) {
  return std::isnan(x) ? std::string() : fmt_double(x);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

inline double parse_cell(const std::string& cell, const std::string& what, size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw config_error("bad " + what + " value \"" + cell + "\" on line " +
                       std::to_string(line_no));
  return v;
}

}  // namespace detail

inline const char* path_csv_header() { return "t,X,x_ode,G,indicator_A,Y_increment"; }

inline std::string render_path_csv(const SdePath& path) {
  std::string out = path_csv_header();
  out += "\n";
  const int nodes = path.grid.n_nodes();
  for (int i = 0; i < nodes; ++i) {
    out += fmt_double(path.grid.node(i));
    out += ",";
    out += fmt_double(path.state[i]);
    out += ",";
    out += fmt_double(path.ode[i]);
    out += ",";
    out += fmt_double(path.driver[i]);
    out += ",";
    out += path.event[i] ? "1" : "0";
    out += ",";
    if (i < nodes - 1) out += fmt_double(path.obs_increments[i]);
    out += "\n";
  }
  return out;
}

inline void write_path_csv(const std::string& file, const SdePath& path) {
  atomic_write_text(file, render_path_csv(path));
}

// Reads a path CSV back. The grid is reconstructed from the time column; the
// noise scale is not stored in the file and is left at zero for the caller to
// fill in from its own configuration.
inline SdePath read_path_csv(const std::string& file) {
  std::istringstream in(read_text_file(file));
  std::string line;
  if (!std::getline(in, line)) throw config_error("empty path csv: " + file);
  const auto header = detail::split_csv_line(line);
  const auto expected = detail::split_csv_line(path_csv_header());
  for (const auto& col : expected) {
    bool found = false;
    for (const auto& h : header)
      if (h == col) found = true;
    if (!found) throw config_error("path csv missing column: " + col);
  }
  if (header != expected)
    throw config_error(std::string("path csv header must be exactly \"") + path_csv_header() +
                       "\"");

  SdePath path;
  std::vector<double> t;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != expected.size())
      throw config_error("path csv line " + std::to_string(line_no) + " has " +
                         std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(expected.size()));
    t.push_back(detail::parse_cell(cells[0], "t", line_no));
    path.state.push_back(detail::parse_cell(cells[1], "X", line_no));
    path.ode.push_back(detail::parse_cell(cells[2], "x_ode", line_no));
    path.driver.push_back(detail::parse_cell(cells[3], "G", line_no));
    const double ind = detail::parse_cell(cells[4], "indicator_A", line_no);
    require(ind == 0.0 || ind == 1.0,
            "indicator_A must be 0 or 1 on line " + std::to_string(line_no));
    path.event.push_back(ind == 1.0 ? 1 : 0);
    if (!cells[5].empty())
      path.obs_increments.push_back(detail::parse_cell(cells[5], "Y_increment", line_no));
  }
  require(t.size() >= 3, "path csv needs at least 3 data rows");
  require(t.front() == 0.0, "path csv must start at t = 0");
  path.grid.horizon = t.back();
  path.grid.n_steps = static_cast<int>(t.size()) - 1;
  path.grid.validate();
  const double h = path.grid.step();
  for (size_t i = 0; i < t.size(); ++i)
    require(std::abs(t[i] - path.grid.node(static_cast<int>(i))) <= 1e-9 * path.grid.horizon,
            "path csv time column is not a uniform grid");
  require(path.obs_increments.size() == t.size() - 1,
          "path csv must carry one Y_increment per step (last row cell empty)");
  (void)h;
  path.x0 = path.state.front();
  return path;
}

inline std::string render_curve_csv(const EstimateCurve& curve) {
  std::string out;
  out += "# target=";
  out += curve.target == EstimateTarget::Drift ? "drift" : "multiplier";
  out += " kernel=" + curve.kernel_name;
  out += " bandwidth=" + fmt_double(curve.bandwidth);
  out += " epsilon=" + fmt_double(curve.noise_scale);
  out += " window=[" + fmt_double(curve.window.lo) + "," + fmt_double(curve.window.hi) + "]\n";
  out += "t,estimate\n";
  for (size_t i = 0; i < curve.points.size(); ++i)
    out += fmt_double(curve.points[i]) + "," + fmt_double(curve.values[i]) + "\n";
  return out;
}

inline void write_curve_csv(const std::string& file, const EstimateCurve& curve) {
  atomic_write_text(file, render_curve_csv(curve));
}

// Long-format experiment report: one row per (ladder entry, metric, point).
// Wall-clock time never appears here so reruns compare byte-for-byte.
inline std::string render_report_csv(const McReport& report) {
  std::string out = "epsilon,phi,metric,t,value,se\n";
  auto row = [&](double eps, double phi, const std::string& metric, double t, double value,
                 double se) {
    out += detail::csv_cell(eps) + "," + detail::csv_cell(phi) + "," + metric + "," +
           detail::csv_cell(t) + "," + detail::csv_cell(value) + "," + detail::csv_cell(se) +
           "\n";
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : report.rows) {
    for (size_t p = 0; p < r.point_risk.size(); ++p)
      row(r.epsilon, r.bandwidth, "risk", r.eval_points[p], r.point_risk[p], r.point_risk_se[p]);
    switch (report.target) {
      case ExperimentTarget::Consistency:
        row(r.epsilon, r.bandwidth, "sup_risk", nan, r.sup_risk, r.sup_risk_se);
        break;
      case ExperimentTarget::RateDrift:
      case ExperimentTarget::RateMultiplier:
        row(r.epsilon, r.bandwidth, "mean_max_error", nan, r.sup_risk, r.sup_risk_se);
        row(r.epsilon, r.bandwidth, "ratio", nan, r.ratio, nan);
        if (report.target == ExperimentTarget::RateMultiplier)
          row(r.epsilon, r.bandwidth, "event_fail_rate", nan, r.event_fail_rate,
              r.event_fail_se);
        break;
      case ExperimentTarget::Normality:
        break;
      case ExperimentTarget::GapBound:
        row(r.epsilon, nan, "mean_sup_gap", nan, r.mean_sup_gap, r.gap_se);
        row(r.epsilon, nan, "mean_bound", nan, r.bound, r.bound_se);
        row(r.epsilon, nan, "euler_slack", nan, r.slack, nan);
        row(r.epsilon, nan, "pathwise_violations", nan,
            static_cast<double>(r.pathwise_violations), nan);
        break;
    }
  }
  if (report.normality) {
    const auto& ns = *report.normality;
    row(ns.epsilon, ns.bandwidth, "clt_sample_mean", ns.eval_point, ns.sample_mean, ns.se_mean);
    row(ns.epsilon, ns.bandwidth, "clt_sample_variance", ns.eval_point, ns.sample_variance, nan);
    row(ns.epsilon, ns.bandwidth, "clt_predicted_mean", ns.eval_point, ns.predicted_mean, nan);
    row(ns.epsilon, ns.bandwidth, "clt_predicted_variance", ns.eval_point, ns.predicted_variance,
        nan);
    row(ns.epsilon, ns.bandwidth, "clt_skewness", ns.eval_point, ns.skewness, nan);
    row(ns.epsilon, ns.bandwidth, "clt_excess_kurtosis", ns.eval_point, ns.excess_kurtosis, nan);
    row(ns.epsilon, ns.bandwidth, "clt_ecdf_distance", ns.eval_point, ns.ecdf_distance, nan);
    row(ns.epsilon, ns.bandwidth, "clt_ecdf_limit", ns.eval_point, ns.ecdf_limit, nan);
  }
  return out;
}

inline void write_report_csv(const std::string& file, const McReport& report) {
  atomic_write_text(file, render_report_csv(report));
}

inline std::string render_clt_samples_csv(const McReport& report) {
  require(report.normality.has_value(), "report carries no normality samples");
  std::string out = "epsilon,normalized_error\n";
  const auto& ns = *report.normality;
  for (double w : ns.samples) out += fmt_double(ns.epsilon) + "," + fmt_double(w) + "\n";
  return out;
}

inline void write_clt_samples_csv(const std::string& file, const McReport& report) {
  atomic_write_text(file, render_clt_samples_csv(report));
}

}  // namespace gpsde
