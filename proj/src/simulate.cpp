#include "lmc/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace lmc {

LatentField sample_lmc(const CoregState& state, const SpatialCorrSet& corr,
                       Rng& rng) {
  if (state.dim() != corr.p())
    throw std::invalid_argument("sample_lmc: state/corr dimension mismatch");
  const int p = state.dim();
  const int n = corr.n();
  LatentField w(p, n);
  for (int j = 0; j < p; ++j) {
    Rng row_rng = rng.stream(j);
    Vector z(n);
    for (int i = 0; i < n; ++i) z[i] = row_rng.normal();
    w.row(j) = (corr.chol_lower(j) * z).transpose();
  }
  return state.coreg() * w;
}

ObservedData sample_observed(const LatentField& v, const NoiseParams& tau,
                             const MeanParams& mu, const ByteMatrix& avail,
                             Rng& rng) {
  const int p = static_cast<int>(v.rows());
  const int n = static_cast<int>(v.cols());
  if (tau.size() != p || mu.size() != p)
    throw std::invalid_argument("sample_observed: tau/mu length != p");
  if (avail.rows() != p || avail.cols() != n)
    throw std::invalid_argument("sample_observed: avail shape mismatch");
  validate_noise(tau);
  Matrix y = Matrix::Zero(p, n);
  for (int j = 0; j < p; ++j) {
    Rng row_rng = rng.stream(j);
    const double sd = std::sqrt(tau[j]);
    for (int i = 0; i < n; ++i) {
      const double noise = row_rng.normal();
      if (avail(j, i) != 0) y(j, i) = v(j, i) + mu[j] + sd * noise;
    }
  }
  return ObservedData(std::move(y), avail);
}

RangeParams log_spaced_ranges(int p, double lo, double hi) {
  if (p < 1) throw std::invalid_argument("log_spaced_ranges: p < 1");
  RangeParams phi(p);
  if (p == 1) {
    phi[0] = lo;
    return phi;
  }
  const double step = (std::log(hi) - std::log(lo)) / (p - 1);
  for (int j = 0; j < p; ++j) phi[j] = std::exp(std::log(lo) + j * step);
  phi[0] = lo;  // exact endpoints
  phi[p - 1] = hi;
  return phi;
}

StudyScenario make_study_scenario(ScenarioKind kind, int p, int n, Rng& rng) {
  if (p < 1 || n < 1)
    throw std::invalid_argument("study scenario: need p >= 1 and n >= 1");
  Matrix points(n, 2);
  Rng loc_rng = rng.stream(0);
  for (int i = 0; i < n; ++i) {
    points(i, 0) = loc_rng.uniform();
    points(i, 1) = loc_rng.uniform();
  }

  Matrix a;
  IntMatrix mask;
  if (kind == ScenarioKind::kFull) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    a = Matrix::Constant(p, p, scale);
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) a(i, j) = -scale;
    mask = IntMatrix::Constant(p, p, 1);
  } else {
    a = Matrix::Identity(p, p);
    mask = IntMatrix::Identity(p, p);
  }

  return StudyScenario{Locations(std::move(points)),
                       CoregState(std::move(a), std::move(mask)),
                       log_spaced_ranges(p), NoiseParams::Constant(p, 0.25)};
}

}  // namespace lmc
