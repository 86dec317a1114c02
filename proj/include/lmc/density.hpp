#pragma once

#include <Eigen/Cholesky>
#include <vector>

#include "lmc/core.hpp"

namespace lmc {

// Cached spatial correlation structure: for each process j, the n x n
// correlation matrix R_j over a fixed location set together with its lower
// Cholesky factor, inverse and log-determinant. The explicit inverses are
// kept because the latent-field and range updates consume individual entries.
class SpatialCorrSet {
 public:
  SpatialCorrSet(const Locations& locs, const RangeParams& phi,
                 CorrelationFamily family, double jitter = 0.0);

  int n() const { return n_; }
  int p() const { return static_cast<int>(r_.size()); }
  double jitter() const { return jitter_; }
  CorrelationFamily family() const { return family_; }

  const Matrix& r(int j) const { return r_[j]; }
  const Matrix& chol_lower(int j) const { return chol_[j]; }
  const Matrix& r_inv(int j) const { return r_inv_[j]; }
  double log_det(int j) const { return log_det_[j]; }
  double log_det_sum() const;

 private:
  int n_ = 0;
  double jitter_ = 0.0;
  CorrelationFamily family_ = CorrelationFamily::kExponential;
  std::vector<Matrix> r_;
  std::vector<Matrix> chol_;
  std::vector<Matrix> r_inv_;
  std::vector<double> log_det_;
};

// Exact LMC log-density of the p x n field V in matrix form:
//   -1/2 sum_j a_j^{-1} V R_j^{-1} V^T a_j^{-T}
//   - (np/2) log 2pi - n log|det(A o M)| - 1/2 sum_j log det R_j.
// Cost is linear in p given the cached factorizations.
double lmc_logpdf_matrix(const LatentField& v, const CoregState& state,
                         const SpatialCorrSet& corr);

// Naive oracle: densifies the np x np covariance sum_j R_j (x) a_j a_j^T of
// vec(V) (columns of V stacked, i.e. location-major) and evaluates the
// generic Gaussian log-density. Guarded to np <= size_guard.
double lmc_logpdf_naive(const LatentField& v, const CoregState& state,
                        const SpatialCorrSet& corr, int size_guard = 4000);

// The densified covariance itself (location-major stacking).
Matrix dense_covariance(const CoregState& state, const SpatialCorrSet& corr,
                        int size_guard = 4000);

// Closed-form precision: sum_j R_j^{-1} (x) a_j^{-T} a_j^{-1}, with a_j^{-1}
// the j-th row of the inverted effective matrix.
Matrix kron_sum_inverse(const CoregState& state, const SpatialCorrSet& corr,
                        int size_guard = 4000);

// Closed-form log-determinant: 2n log|det(A o M)| + sum_j log det R_j.
double kron_sum_logdet(const CoregState& state, const SpatialCorrSet& corr);

// Log joint density of (V, observed cells of Y) under the hierarchical model:
// the LMC term is evaluated at V - mu 1^T and the observation term runs over
// available cells only, each contributing -((v-y)^2/tau + log 2pi tau)/2.
double complete_loglik_centered(const ObservedData& y, const LatentField& v,
                                const CoregState& state,
                                const SpatialCorrSet& corr,
                                const NoiseParams& tau, const MeanParams& mu);

// Same joint density in the whitened parametrization: rows of W are the
// independent base processes and the fit is (A o M) W + mu 1^T. Differs from
// the centered form by exactly +n log|det(A o M)| (change of variables).
double complete_loglik_whitened(const ObservedData& y, const LatentField& w,
                                const CoregState& state,
                                const SpatialCorrSet& corr,
                                const NoiseParams& tau, const MeanParams& mu);

// Gram matrices S_j = (V - mu 1^T) R_j^{-1} (V - mu 1^T)^T, the per-iteration
// caches that make coregionalization updates independent of n.
std::vector<Matrix> lmc_gram(const LatentField& v, const MeanParams& mu,
                             const SpatialCorrSet& corr);

// LMC term of the centered likelihood as a function of the effective matrix,
// evaluated from cached Gram matrices:
//   -1/2 sum_j g_j S_j g_j^T - n log|det Ae|  (g_j = row j of Ae^{-1}).
// Returns -inf when Ae is singular.
double coreg_log_target(const Matrix& effective, const std::vector<Matrix>& gram,
                        int n);

}  // namespace lmc
