#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lmc/density.hpp"
#include "lmc/simulate.hpp"
#include "test_util.hpp"

using namespace lmc;
namespace tu = lmc::testutil;

TEST_CASE("p=1 sample is the colored GP draw a * (B z)") {
  Rng rng(201);
  const Locations locs = tu::random_locations(8, rng);
  RangeParams phi(1);
  phi << 7.0;
  const SpatialCorrSet corr(locs, phi, CorrelationFamily::kExponential, 0.0);
  Matrix a(1, 1);
  a << 1.9;
  const CoregState state = CoregState::dense(a);

  Rng draw_rng(555);
  const LatentField v = sample_lmc(state, corr, draw_rng);

  // Reproduce the row-0 substream by hand.
  Rng expect_rng(555);
  Rng row = expect_rng.stream(0);
  Vector z(8);
  for (int i = 0; i < 8; ++i) z[i] = row.normal();
  const Vector expect = 1.9 * (corr.chol_lower(0) * z);
  CHECK((v.row(0).transpose() - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("scaling: A = eps I gives row variances about eps^2") {
  Rng rng(202);
  const Locations locs = tu::random_locations(40, rng);
  const RangeParams phi = tu::random_ranges(2, rng, 20.0, 30.0);
  const SpatialCorrSet corr(locs, phi, CorrelationFamily::kExponential, 0.0);
  const double eps = 1e-3;
  const CoregState state = CoregState::dense(eps * Matrix::Identity(2, 2));
  std::vector<double> values;
  for (int rep = 0; rep < 200; ++rep) {
    Rng draw = rng.split();
    const LatentField v = sample_lmc(state, corr, draw);
    for (int i = 0; i < 40; ++i) values.push_back(v(0, i));
  }
  const double var = tu::variance_of(values);
  CHECK(var == doctest::Approx(eps * eps).epsilon(0.2));
}

TEST_CASE("vec(V) covariance matches the Kronecker sum (Monte Carlo)") {
  Rng rng(203);
  const int p = 3, n = 5, draws = 2000;
  const Locations locs = tu::random_locations(n, rng);
  const RangeParams phi = tu::random_ranges(p, rng);
  const SpatialCorrSet corr(locs, phi, CorrelationFamily::kExponential, 0.0);
  const CoregState state = tu::random_dense_state(p, rng);
  const Matrix truth = dense_covariance(state, corr);

  Matrix acc = Matrix::Zero(n * p, n * p);
  Vector mean_acc = Vector::Zero(n * p);
  for (int rep = 0; rep < draws; ++rep) {
    Rng draw = rng.split();
    const Vector vec = tu::vec_location_major(sample_lmc(state, corr, draw));
    acc += vec * vec.transpose();
    mean_acc += vec;
  }
  const Matrix emp = acc / draws;
  const Vector mean = mean_acc / draws;
  for (int i = 0; i < n * p; ++i) {
    CHECK(std::abs(mean[i]) < 5.0 * std::sqrt(truth(i, i) / draws));
    for (int k = 0; k < n * p; ++k) {
      const double se = std::sqrt(
          (truth(i, i) * truth(k, k) + truth(i, k) * truth(i, k)) / draws);
      CHECK(std::abs(emp(i, k) - truth(i, k)) < 5.0 * se);
    }
  }
}

TEST_CASE("whitened rows recover their own correlation (Monte Carlo)") {
  Rng rng(204);
  const int p = 2, n = 4, draws = 4000;
  const Locations locs = tu::random_locations(n, rng);
  const RangeParams phi = tu::random_ranges(p, rng);
  const SpatialCorrSet corr(locs, phi, CorrelationFamily::kExponential, 0.0);
  const CoregState state = tu::random_dense_state(p, rng);

  std::vector<Matrix> acc(p, Matrix::Zero(n, n));
  for (int rep = 0; rep < draws; ++rep) {
    Rng draw = rng.split();
    const Matrix w = state.inverse() * sample_lmc(state, corr, draw);
    for (int j = 0; j < p; ++j)
      acc[j] += w.row(j).transpose() * w.row(j);
  }
  for (int j = 0; j < p; ++j) {
    const Matrix emp = acc[j] / draws;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const double truth = corr.r(j)(i, k);
        const double se =
            std::sqrt((1.0 + truth * truth) / draws);  // unit variances
        CHECK(std::abs(emp(i, k) - truth) < 5.0 * se);
      }
  }
}

TEST_CASE("observation noise: tiny variance pins Y to V + mu") {
  Rng rng(205);
  const int p = 2, n = 10;
  Matrix v(p, n);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) v(j, i) = rng.normal();
  MeanParams mu(p);
  mu << 1.5, -0.5;
  const NoiseParams tau = NoiseParams::Constant(p, 1e-12);
  Rng draw = rng.split();
  const ObservedData y =
      sample_observed(v, tau, mu, ByteMatrix::Constant(p, n, 1), draw);
  const Matrix expect = v.colwise() + mu;
  CHECK((y.y - expect).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("observation noise: mu shifts each row mean") {
  Rng rng(206);
  const int p = 2, n = 5000;
  const Matrix v = Matrix::Zero(p, n);
  MeanParams mu(p);
  mu << 2.0, -3.0;
  const NoiseParams tau = NoiseParams::Constant(p, 0.5);
  Rng draw = rng.split();
  const ObservedData y =
      sample_observed(v, tau, mu, ByteMatrix::Constant(p, n, 1), draw);
  for (int j = 0; j < p; ++j) {
    const double row_mean = y.y.row(j).mean();
    CHECK(std::abs(row_mean - mu[j]) < 5.0 * std::sqrt(0.5 / n));
  }
}

TEST_CASE("observation noise: residual variance matches tau") {
  Rng rng(207);
  const int p = 1, n = 10000;
  const Matrix v = Matrix::Zero(p, n);
  const double tau = 0.7;
  Rng draw = rng.split();
  const ObservedData y =
      sample_observed(v, NoiseParams::Constant(1, tau), MeanParams::Zero(1),
                      ByteMatrix::Constant(p, n, 1), draw);
  std::vector<double> resid(y.y.row(0).begin(), y.y.row(0).end());
  const double var = tu::variance_of(resid);
  const double se = tau * std::sqrt(2.0 / (n - 1.0));
  CHECK(std::abs(var - tau) < 5.0 * se);
}

TEST_CASE("unavailable cells hold placeholder zero") {
  Rng rng(208);
  Matrix v(1, 4);
  v << 1.0, 2.0, 3.0, 4.0;
  ByteMatrix avail(1, 4);
  avail << 1, 0, 1, 0;
  Rng draw = rng.split();
  const ObservedData y = sample_observed(
      v, NoiseParams::Constant(1, 0.1), MeanParams::Zero(1), avail, draw);
  CHECK(y.y(0, 1) == 0.0);
  CHECK(y.y(0, 3) == 0.0);
  CHECK(y.n_avail(0) == 2);
}

TEST_CASE("log-spaced ranges reproduce the study values") {
  const RangeParams phi5 = log_spaced_ranges(5);
  // Published rounding: (5, 7.48, 11.18, 16.72, 25).
  const double expect[] = {5.0, 7.48, 11.18, 16.72, 25.0};
  for (int j = 0; j < 5; ++j)
    CHECK(phi5[j] == doctest::Approx(expect[j]).epsilon(2e-3));
  // Exact law: 5^(1 + j/4).
  for (int j = 0; j < 5; ++j)
    CHECK(phi5[j] ==
          doctest::Approx(std::pow(5.0, 1.0 + j / 4.0)).epsilon(1e-12));
  const RangeParams phi1 = log_spaced_ranges(1);
  CHECK(phi1[0] == 5.0);
}

TEST_CASE("study scenarios: layout, ranges, noise") {
  Rng rng(209);
  const StudyScenario full = make_study_scenario(ScenarioKind::kFull, 3, 50, rng);
  CHECK(full.locs.size() == 50);
  CHECK((full.locs.points().array() >= 0.0).all());
  CHECK((full.locs.points().array() <= 1.0).all());
  const double s = 1.0 / std::sqrt(3.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(full.state.coreg()(i, j) ==
            doctest::Approx(j > i ? -s : s).epsilon(1e-14));
  CHECK((full.tau.array() == 0.25).all());

  Rng rng2(209);
  const StudyScenario again =
      make_study_scenario(ScenarioKind::kFull, 3, 50, rng2);
  CHECK((full.locs.points() - again.locs.points()).norm() == 0.0);

  Rng rng3(210);
  const StudyScenario diag =
      make_study_scenario(ScenarioKind::kDiagonal, 4, 20, rng3);
  CHECK((diag.state.coreg() - Matrix::Identity(4, 4)).norm() == 0.0);
  CHECK(diag.state.mask().diagonal().sum() == 4);
  CHECK(diag.state.mask().sum() == 4);
}

TEST_CASE("full scenario at p=2 has unit marginal covariance") {
  Rng rng(211);
  const StudyScenario scen = make_study_scenario(ScenarioKind::kFull, 2, 10, rng);
  CHECK((marginal_covariance(scen.state) - Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}
