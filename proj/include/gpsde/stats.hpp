#pragma once
// Sample statistics used by the Monte Carlo harness: moments, standard errors,
// and an empirical-CDF distance against a normal reference.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gpsde/common.hpp"

namespace gpsde {

struct SampleStats {
  int n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n-1)
  double sd = 0.0;
  double se_mean = std::numeric_limits<double>::quiet_NaN();
  double skewness = std::numeric_limits<double>::quiet_NaN();
  double excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
  double min = 0.0, max = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats s;
  s.n = static_cast<int>(xs.size());
  if (s.n == 0) return s;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.n;
  if (s.n < 2) return s;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  s.variance = m2 / (s.n - 1);
  s.sd = std::sqrt(s.variance);
  s.se_mean = s.sd / std::sqrt(static_cast<double>(s.n));
  m2 /= s.n;
  m3 /= s.n;
  m4 /= s.n;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

inline double normal_cdf(double x, double mu = 0.0, double sigma = 1.0) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * 1.4142135623730951));
}

// Kolmogorov-Smirnov sup-distance between the sample ECDF and N(mu, sigma^2).
inline double ecdf_distance_vs_normal(std::vector<double> xs, double mu, double sigma) {
  require(!xs.empty(), "ecdf distance needs a non-empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf(xs[i], mu, sigma);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  return d;
}

// Monotone-trend check: values must not increase by more than `se_mult`
// combined standard errors step to step. NaN SEs (single-replication runs)
// degrade to a strict comparison with zero slack.
inline bool trend_decreasing(const std::vector<double>& values, const std::vector<double>& ses,
                             double se_mult) {
  for (size_t i = 0; i + 1 < values.size(); ++i) {
    double slack = 0.0;
    if (i < ses.size() && i + 1 < ses.size() && std::isfinite(ses[i]) && std::isfinite(ses[i + 1]))
      slack = se_mult * std::sqrt(ses[i] * ses[i] + ses[i + 1] * ses[i + 1]);
    if (values[i + 1] > values[i] + slack) return false;
  }
  return true;
}

}  // namespace gpsde
