#pragma once
// Centered Gaussian driver processes given by closed-form covariances, exact
// path sampling on a uniform grid through Cholesky factorization, and a Monte
// Carlo estimate of E[sup |G|].

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gpsde/common.hpp"
#include "gpsde/grid.hpp"
#include "gpsde/rng.hpp"
#include "gpsde/stats.hpp"

namespace gpsde {

enum class ProcessKind { FractionalBrownian, SubFractionalBrownian, BifractionalBrownian, Custom };

struct CovarianceModel {
  ProcessKind kind = ProcessKind::FractionalBrownian;
  double hurst = 0.5;        // H in (0,1)
  double bi_exponent = 1.0;  // bifractional K in (0,1]
  std::function<double(double, double)> custom;  // used only for kind == Custom

  static CovarianceModel fractional(double h) {
    return {ProcessKind::FractionalBrownian, h, 1.0, nullptr};
  }
  static CovarianceModel sub_fractional(double h) {
    return {ProcessKind::SubFractionalBrownian, h, 1.0, nullptr};
  }
  static CovarianceModel bifractional(double h, double k) {
    return {ProcessKind::BifractionalBrownian, h, k, nullptr};
  }
  static CovarianceModel custom_model(std::function<double(double, double)> fn) {
    return {ProcessKind::Custom, 0.5, 1.0, std::move(fn)};
  }

  void validate() const {
    if (kind == ProcessKind::Custom) {
      require(static_cast<bool>(custom), "custom covariance model needs an evaluation function");
      return;
    }
    require(hurst > 0.0 && hurst < 1.0, "model.hurst out of range (0,1)");
    if (kind == ProcessKind::BifractionalBrownian)
      require(bi_exponent > 0.0 && bi_exponent <= 1.0, "model.bi_exponent out of range (0,1]");
  }

  std::string name() const {
    switch (kind) {
      case ProcessKind::FractionalBrownian: return "fractional";
      case ProcessKind::SubFractionalBrownian: return "sub_fractional";
      case ProcessKind::BifractionalBrownian: return "bifractional";
      default: return "custom";
    }
  }
};

inline double covariance_at(const CovarianceModel& m, double s, double t) {
  m.validate();
  require(s >= 0.0 && t >= 0.0, "covariance arguments must be >= 0");
  const double h2 = 2.0 * m.hurst;
  switch (m.kind) {
    case ProcessKind::FractionalBrownian:
      return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
    case ProcessKind::SubFractionalBrownian:
      return std::pow(s, h2) + std::pow(t, h2) -
             0.5 * (std::pow(s + t, h2) + std::pow(std::abs(t - s), h2));
    case ProcessKind::BifractionalBrownian: {
      const double k = m.bi_exponent;
      return std::pow(2.0, -k) * (std::pow(std::pow(s, h2) + std::pow(t, h2), k) -
                                  std::pow(std::abs(t - s), h2 * k));
    }
    default:
      return m.custom(s, t);
  }
}

// Covariance over the positive grid nodes (the node at t=0 is pinned to 0).
inline Eigen::MatrixXd covariance_matrix(const CovarianceModel& m, const TimeGrid& grid) {
  grid.validate();
  const int n = grid.n_steps;
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = covariance_at(m, grid.node(i + 1), grid.node(j + 1));
      cov(i, j) = v;
      cov(j, i) = v;
    }
  return cov;
}

struct GaussianPath {
  TimeGrid grid;
  std::vector<double> values;  // n_nodes entries, values[0] == 0
  uint64_t seed = 0;
};

// Factorizes the grid covariance once and draws exact paths from it. The
// factor is immutable after construction, so one sampler can be shared
// read-only across worker threads.
class PathSampler {
 public:
  PathSampler(const CovarianceModel& model, const TimeGrid& grid)
      : model_(model), grid_(grid), cov_(covariance_matrix(model, grid)) {
    factorize();
  }

  const TimeGrid& grid() const { return grid_; }
  const CovarianceModel& model() const { return model_; }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& factor() const { return chol_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  GaussianPath sample(RngStream& stream) const {
    const int n = grid_.n_steps;
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = stream.normal();
    Eigen::VectorXd g = chol_ * z;
    GaussianPath path;
    path.grid = grid_;
    path.values.resize(grid_.n_nodes());
    path.values[0] = 0.0;
    for (int i = 0; i < n; ++i) path.values[i + 1] = g(i);
    return path;
  }

  GaussianPath sample(uint64_t seed, uint64_t stream_id = 0) const {
    RngStream stream(seed, stream_id);
    GaussianPath p = sample(stream);
    p.seed = seed;
    return p;
  }

 private:
  void factorize() {
    const int n = cov_.rows();
    const double max_diag = cov_.diagonal().maxCoeff();
    require(max_diag > 0.0, "covariance diagonal is not positive");
    double lam = 1e-12 * max_diag;
    const double lam_cap = 1e-6 * max_diag;
    while (true) {
      Eigen::LLT<Eigen::MatrixXd> llt(cov_ + lam * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) {
        chol_ = llt.matrixL();
        jitter_ = lam;
        return;
      }
      if (lam >= lam_cap) break;
      lam *= 10.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
    throw numerical_error("covariance factorization failed even with jitter " +
                          fmt_double(lam_cap) + "; smallest eigenvalue approx " +
                          fmt_double(es.eigenvalues().minCoeff()));
  }

  CovarianceModel model_;
  TimeGrid grid_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  double jitter_ = 0.0;
};

inline GaussianPath sample_path(const CovarianceModel& model, const TimeGrid& grid,
                                uint64_t seed) {
  return PathSampler(model, grid).sample(seed);
}

struct SupAbsEstimate {
  double mean = 0.0;
  double se = std::numeric_limits<double>::quiet_NaN();  // NaN when n_reps < 2
  int n_reps = 0;
};

inline double sup_abs(const GaussianPath& path) {
  double m = 0.0;
  for (double v : path.values) m = std::max(m, std::abs(v));
  return m;
}

// Plain Monte Carlo estimate of E[sup_{t in grid} |G_t|]. Replication r draws
// from stream (stream_base + r), so estimates with matched stream bases share
// randomness across grids.
inline SupAbsEstimate estimate_sup_abs(const PathSampler& sampler, int n_reps, uint64_t seed,
                                       uint64_t stream_base = 0) {
  require(n_reps >= 1, "estimate_sup_abs needs n_reps >= 1");
  std::vector<double> sups(n_reps);
  for (int r = 0; r < n_reps; ++r) {
    RngStream stream(seed, stream_base + static_cast<uint64_t>(r));
    sups[r] = sup_abs(sampler.sample(stream));
  }
  const SampleStats s = sample_stats(sups);
  return {s.mean, s.se_mean, n_reps};
}

inline SupAbsEstimate estimate_sup_abs(const CovarianceModel& model, const TimeGrid& grid,
                                       int n_reps, uint64_t seed) {
  return estimate_sup_abs(PathSampler(model, grid), n_reps, seed);
}

}  // namespace gpsde
