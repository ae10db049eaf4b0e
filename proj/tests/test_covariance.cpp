#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gpsde/covariance.hpp"

using namespace gpsde;

TEST_CASE("closed-form covariances at pinned points") {
  const auto bm = CovarianceModel::fractional(0.5);
  CHECK(covariance_at(bm, 0.25, 0.75) == Catch::Approx(0.25).epsilon(1e-14));
  CHECK(covariance_at(bm, 0.5, 0.5) == Catch::Approx(0.5).epsilon(1e-14));

  const auto fbm = CovarianceModel::fractional(0.7);
  const double expect = 0.5 * (std::pow(0.25, 1.4) + std::pow(0.75, 1.4) - std::pow(0.5, 1.4));
  CHECK(covariance_at(fbm, 0.25, 0.75) == Catch::Approx(expect).epsilon(1e-14));

  // Sub-fractional at H = 1/2 has variance t(2 - sqrt(2)) scaling shape.
  const auto sub = CovarianceModel::sub_fractional(0.5);
  CHECK(covariance_at(sub, 1.0, 1.0) == Catch::Approx(2.0 - 0.5 * 2.0).epsilon(1e-14));

  // Bifractional with K = 1 reduces to fractional.
  const auto bif = CovarianceModel::bifractional(0.3, 1.0);
  const auto frac = CovarianceModel::fractional(0.3);
  for (double s : {0.2, 0.6})
    for (double t : {0.4, 1.0})
      CHECK(covariance_at(bif, s, t) == Catch::Approx(covariance_at(frac, s, t)).epsilon(1e-13));
}

TEST_CASE("covariance matrix over the positive nodes") {
  TimeGrid grid{1.0, 2};
  const auto m = covariance_matrix(CovarianceModel::fractional(0.5), grid);
  REQUIRE(m.rows() == 2);
  CHECK(m(0, 0) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(m(0, 1) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(m(1, 0) == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(m(1, 1) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hurst validation message") {
  CHECK_THROWS_MATCHES(CovarianceModel::fractional(1.5).validate(), config_error,
                       Catch::Matchers::Message("model.hurst out of range (0,1)"));
  CHECK_THROWS_AS(CovarianceModel::bifractional(0.5, 1.5).validate(), config_error);
}

TEST_CASE("sampled paths start at zero and are reproducible") {
  TimeGrid grid{1.0, 16};
  const auto model = CovarianceModel::sub_fractional(0.6);
  const GaussianPath p1 = sample_path(model, grid, 99);
  const GaussianPath p2 = sample_path(model, grid, 99);
  const GaussianPath p3 = sample_path(model, grid, 100);
  REQUIRE(p1.values.size() == static_cast<size_t>(grid.n_nodes()));
  CHECK(p1.values[0] == 0.0);
  CHECK(p1.values == p2.values);
  CHECK(p1.values != p3.values);
}

TEST_CASE("empirical covariance matches the model") {
  TimeGrid grid{1.0, 4};
  const auto model = CovarianceModel::fractional(0.7);
  PathSampler sampler(model, grid);
  const int reps = 4000;
  double acc24 = 0.0, acc44 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const GaussianPath p = sampler.sample(5, static_cast<uint64_t>(r));
    acc24 += p.values[2] * p.values[4];
    acc44 += p.values[4] * p.values[4];
  }
  acc24 /= reps;
  acc44 /= reps;
  CHECK(acc24 == Catch::Approx(covariance_at(model, 0.5, 1.0)).epsilon(0.05));
  CHECK(acc44 == Catch::Approx(covariance_at(model, 1.0, 1.0)).epsilon(0.05));
}

TEST_CASE("factorization reconstructs the covariance") {
  TimeGrid grid{1.0, 32};
  PathSampler sampler(CovarianceModel::fractional(0.8), grid);
  const auto& L = sampler.factor();
  const auto& M = sampler.covariance();
  const double err = (L * L.transpose() - M).cwiseAbs().maxCoeff();
  CHECK(err <= sampler.jitter() + 1e-9 * M.cwiseAbs().maxCoeff());
}

TEST_CASE("rank-deficient covariance gets a jitter boost") {
  // cov(s,t) = s t is rank one; plain factorization would stall.
  const auto model = CovarianceModel::custom_model([](double s, double t) { return s * t; });
  TimeGrid grid{1.0, 6};
  PathSampler sampler(model, grid);
  CHECK(sampler.jitter() > 0.0);
  const GaussianPath p = sampler.sample(3, 0);
  CHECK(p.values[0] == 0.0);
}

TEST_CASE("an indefinite covariance is rejected with the smallest eigenvalue") {
  const auto model =
      CovarianceModel::custom_model([](double s, double t) { return s == t ? 1.0 : 2.0; });
  TimeGrid grid{1.0, 2};
  CHECK_THROWS_AS(PathSampler(model, grid), numerical_error);
}

TEST_CASE("sup-abs estimate dominates the endpoint mean") {
  TimeGrid grid{1.0, 64};
  const auto model = CovarianceModel::fractional(0.5);
  PathSampler sampler(model, grid);
  const SupAbsEstimate est = estimate_sup_abs(sampler, 800, 11);
  // E|G_1| = sqrt(2/pi) and the sup dominates |G_1| pathwise.
  CHECK(est.mean + 3.0 * est.se >= std::sqrt(2.0 / M_PI));
  CHECK(est.n_reps == 800);
}

TEST_CASE("refining the grid cannot shrink the expected sup") {
  const auto model = CovarianceModel::fractional(0.5);
  PathSampler coarse(model, TimeGrid{1.0, 16});
  PathSampler fine(model, TimeGrid{1.0, 64});
  const SupAbsEstimate a = estimate_sup_abs(coarse, 600, 21);
  const SupAbsEstimate b = estimate_sup_abs(fine, 600, 21);
  const double slack = 3.0 * std::sqrt(a.se * a.se + b.se * b.se);
  CHECK(b.mean + slack >= a.mean);
}
