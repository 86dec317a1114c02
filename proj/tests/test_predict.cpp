#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lmc/predict.hpp"
#include "lmc/simulate.hpp"
#include "test_util.hpp"

using namespace lmc;
namespace tu = lmc::testutil;

namespace {

struct DenseConditional {
  Vector mean;  // location-major over prediction sites
  Matrix cov;
};

// Brute-force conditioning of the densified joint Gaussian over the union of
// observed and prediction locations (observed block first).
DenseConditional dense_conditioning(const CoregState& state,
                                    const Locations& obs, const Locations& pred,
                                    const RangeParams& phi,
                                    const LatentField& v_obs) {
  Matrix all_pts(obs.size() + pred.size(), 2);
  all_pts.topRows(obs.size()) = obs.points();
  all_pts.bottomRows(pred.size()) = pred.points();
  const Locations all(std::move(all_pts));
  const SpatialCorrSet corr(all, phi, CorrelationFamily::kExponential, 0.0);
  const Matrix cov = dense_covariance(state, corr);

  const int p = state.dim();
  const int no = obs.size() * p;
  const int nm = pred.size() * p;
  const Matrix c_oo = cov.topLeftCorner(no, no);
  const Matrix c_om = cov.topRightCorner(no, nm);
  const Matrix c_mm = cov.bottomRightCorner(nm, nm);
  const Vector v = tu::vec_location_major(v_obs);
  const Matrix solve = c_oo.llt().solve(c_om);
  return DenseConditional{solve.transpose() * v,
                          c_mm - c_om.transpose() * solve};
}

}  // namespace

TEST_CASE("predicting at the observed sites interpolates exactly") {
  Rng rng(401);
  const int p = 2, n = 8;
  const Locations locs = tu::random_locations(n, rng);
  const RangeParams phi = tu::random_ranges(p, rng);
  const CoregState state = tu::random_dense_state(p, rng);
  const SpatialCorrSet corr(locs, phi, CorrelationFamily::kExponential, 0.0);
  Rng field = rng.split();
  const LatentField v = sample_lmc(state, corr, field);

  const PartitionedCorr part(locs, locs, phi, CorrelationFamily::kExponential,
                             0.0);
  const ConditionalLmc cond = conditional_lmc(state, part, v);
  CHECK((cond.mean - v).cwiseAbs().maxCoeff() < 1e-8);
  for (int j = 0; j < p; ++j)
    CHECK(cond.cond_corr[j].cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("p=1 kriging mean is the classical simple-kriging predictor") {
  Rng rng(402);
  const Locations obs = tu::random_locations(10, rng);
  const Locations pred = tu::random_locations(4, rng);
  RangeParams phi(1);
  phi << 9.0;
  Matrix a(1, 1);
  a << 2.3;
  const CoregState state = CoregState::dense(a);
  const SpatialCorrSet corr(obs, phi, CorrelationFamily::kExponential, 0.0);
  Rng field = rng.split();
  const LatentField v = sample_lmc(state, corr, field);

  const PartitionedCorr part(obs, pred, phi, CorrelationFamily::kExponential,
                             0.0);
  const ConditionalLmc cond = conditional_lmc(state, part, v);
  // The coregionalization scalar cancels: mean = V_obs R^{-1} r.
  const Vector expect =
      part.r_obs_pred(0).transpose() *
      part.r_obs(0).llt().solve(v.row(0).transpose());
  CHECK((cond.mean.row(0).transpose() - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("conditional mean and covariance match dense conditioning") {
  Rng master(403);
  for (int rep = 0; rep < 4; ++rep) {
    Rng rng = master.stream(rep);
    const int p = 3;
    const Locations obs = tu::random_locations(15, rng);
    const Locations pred = tu::random_locations(5, rng);
    const RangeParams phi = tu::random_ranges(p, rng);
    const CoregState state = tu::random_dense_state(p, rng);
    const SpatialCorrSet corr(obs, phi, CorrelationFamily::kExponential, 0.0);
    Rng field = rng.split();
    const LatentField v = sample_lmc(state, corr, field);

    const PartitionedCorr part(obs, pred, phi,
                               CorrelationFamily::kExponential, 0.0);
    const ConditionalLmc cond = conditional_lmc(state, part, v);
    const DenseConditional oracle = dense_conditioning(state, obs, pred, phi, v);

    CHECK((tu::vec_location_major(cond.mean) - oracle.mean)
              .cwiseAbs()
              .maxCoeff() < 1e-8);

    // Prop. 2: the conditional covariance is sum_j cond_corr_j (x) a_j a_j^T.
    const int nm = pred.size();
    Matrix full = Matrix::Zero(nm * p, nm * p);
    for (int j = 0; j < p; ++j) {
      const Matrix outer =
          state.coreg().col(j) * state.coreg().col(j).transpose();
      for (int i = 0; i < nm; ++i)
        for (int k = 0; k < nm; ++k)
          full.block(i * p, k * p, p, p) += cond.cond_corr[j](i, k) * outer;
    }
    CHECK((full - oracle.cov).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("conditional correlation matrices are PSD") {
  Rng rng(404);
  const int p = 3;
  const Locations obs = tu::random_locations(12, rng);
  const Locations pred = tu::random_locations(6, rng);
  const RangeParams phi = tu::random_ranges(p, rng);
  const CoregState state = tu::random_dense_state(p, rng);
  const SpatialCorrSet corr(obs, phi, CorrelationFamily::kExponential, 0.0);
  Rng field = rng.split();
  const LatentField v = sample_lmc(state, corr, field);
  const PartitionedCorr part(obs, pred, phi, CorrelationFamily::kExponential,
                             0.0);
  const ConditionalLmc cond = conditional_lmc(state, part, v);
  for (int j = 0; j < p; ++j) {
    Matrix shifted = cond.cond_corr[j];
    shifted.diagonal().array() += 1e-10;
    const Eigen::LLT<Matrix> llt(shifted);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("kriging mean is linear in the observed field") {
  Rng rng(405);
  const int p = 2;
  const Locations obs = tu::random_locations(9, rng);
  const Locations pred = tu::random_locations(3, rng);
  const RangeParams phi = tu::random_ranges(p, rng);
  const CoregState state = tu::random_dense_state(p, rng);
  const PartitionedCorr part(obs, pred, phi, CorrelationFamily::kExponential,
                             0.0);
  Matrix v1(p, 9), v2(p, 9);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < 9; ++i) {
      v1(j, i) = rng.normal();
      v2(j, i) = rng.normal();
    }
  const double alpha = 0.7, beta = -1.3;
  const Matrix lhs =
      conditional_lmc(state, part, alpha * v1 + beta * v2).mean;
  const Matrix rhs = alpha * conditional_lmc(state, part, v1).mean +
                     beta * conditional_lmc(state, part, v2).mean;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degenerate conditional returns the kriging mean exactly") {
  Rng rng(406);
  const int p = 2, n = 7;
  const Locations locs = tu::random_locations(n, rng);
  const RangeParams phi = tu::random_ranges(p, rng);
  const CoregState state = tu::random_dense_state(p, rng);
  const SpatialCorrSet corr(locs, phi, CorrelationFamily::kExponential, 0.0);
  Rng field = rng.split();
  const LatentField v = sample_lmc(state, corr, field);
  const PartitionedCorr part(locs, locs, phi, CorrelationFamily::kExponential,
                             0.0);
  Rng draw = rng.split();
  const LatentField sampled = predict_draw(state, part, v, draw);
  CHECK((sampled - v).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("prediction draws have the conditional mean and covariance") {
  Rng rng(407);
  const int p = 2, draws = 5000;
  const Locations obs = tu::random_locations(10, rng);
  const Locations pred = tu::random_locations(3, rng);
  const RangeParams phi = tu::random_ranges(p, rng);
  const CoregState state = tu::random_dense_state(p, rng);
  const SpatialCorrSet corr(obs, phi, CorrelationFamily::kExponential, 0.0);
  Rng field = rng.split();
  const LatentField v = sample_lmc(state, corr, field);
  const PartitionedCorr part(obs, pred, phi, CorrelationFamily::kExponential,
                             0.0);
  const ConditionalLmc cond = conditional_lmc(state, part, v);

  const int nm = pred.size();
  Vector mean_acc = Vector::Zero(nm * p);
  Matrix cov_acc = Matrix::Zero(nm * p, nm * p);
  for (int rep = 0; rep < draws; ++rep) {
    Rng draw = rng.split();
    const Vector x = tu::vec_location_major(predict_draw(state, part, v, draw));
    mean_acc += x;
    cov_acc += x * x.transpose();
  }
  const Vector emp_mean = mean_acc / draws;
  const Vector cond_mean = tu::vec_location_major(cond.mean);
  Matrix cond_cov = Matrix::Zero(nm * p, nm * p);
  for (int j = 0; j < p; ++j) {
    const Matrix outer = state.coreg().col(j) * state.coreg().col(j).transpose();
    for (int i = 0; i < nm; ++i)
      for (int k = 0; k < nm; ++k)
        cond_cov.block(i * p, k * p, p, p) += cond.cond_corr[j](i, k) * outer;
  }
  const Matrix emp_cov = cov_acc / draws - emp_mean * emp_mean.transpose() +
                         (emp_mean - cond_mean) * (emp_mean - cond_mean).transpose();
  for (int i = 0; i < nm * p; ++i) {
    CHECK(std::abs(emp_mean[i] - cond_mean[i]) <
          5.0 * std::sqrt(std::max(cond_cov(i, i), 1e-12) / draws) + 1e-9);
    for (int k = 0; k < nm * p; ++k) {
      const double se = std::sqrt(
          (cond_cov(i, i) * cond_cov(k, k) + cond_cov(i, k) * cond_cov(i, k)) /
              draws +
          1e-16);
      CHECK(std::abs(emp_cov(i, k) - cond_cov(i, k)) < 5.0 * se + 1e-9);
    }
  }
}

TEST_CASE("posterior prediction with one sample is the kriging mean") {
  Rng rng(408);
  const int p = 2, n = 8;
  const Locations obs = tu::random_locations(n, rng);
  const Locations pred = tu::random_locations(4, rng);
  const RangeParams phi = tu::random_ranges(p, rng);
  const CoregState state = tu::random_dense_state(p, rng);
  const SpatialCorrSet corr(obs, phi, CorrelationFamily::kExponential, 0.0);
  Rng field = rng.split();
  const LatentField v = sample_lmc(state, corr, field);

  ChainRecord rec;
  rec.a = state.coreg();
  rec.m = state.mask();
  rec.phi = phi;
  rec.tau = NoiseParams::Constant(p, 0.25);
  rec.mu = MeanParams::Zero(p);
  rec.loglik = 0.0;

  const PredictionSummary summary = posterior_predict(
      {rec}, {v}, obs, pred, CorrelationFamily::kExponential, 0.0);
  const PartitionedCorr part(obs, pred, phi, CorrelationFamily::kExponential,
                             0.0);
  const Matrix expect = conditional_lmc(state, part, v).mean;
  CHECK((summary.mean - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((summary.q05 - expect).cwiseAbs().maxCoeff() < 1e-12);

  // Truth = the prediction itself: zero error.
  const double rmse = posterior_predict_rmse(
      {rec}, {v}, obs, pred, expect, CorrelationFamily::kExponential, 0.0);
  CHECK(rmse == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("posterior prediction validates chain/latent agreement") {
  Rng rng(409);
  const Locations obs = tu::random_locations(4, rng);
  const Locations pred = tu::random_locations(2, rng);
  CHECK_THROWS_AS(posterior_predict({}, {}, obs, pred,
                                    CorrelationFamily::kExponential, 0.0),
                  std::invalid_argument);
}
