#pragma once

#include <vector>

#include "lmc/core.hpp"
#include "lmc/density.hpp"
#include "lmc/rng.hpp"

namespace lmc {

// Per-process correlation blocks of one correlation function evaluated over
// the union of observed and prediction locations, partitioned as
// [R_obs, R_obs_pred; R_pred_obs, R_pred].
class PartitionedCorr {
 public:
  PartitionedCorr(const Locations& obs, const Locations& pred,
                  const RangeParams& phi, CorrelationFamily family,
                  double jitter = 0.0);

  int n_obs() const { return n_obs_; }
  int n_pred() const { return n_pred_; }
  int p() const { return static_cast<int>(r_obs_.size()); }

  const Matrix& r_obs(int j) const { return r_obs_[j]; }
  const Matrix& r_obs_pred(int j) const { return r_obs_pred_[j]; }
  const Matrix& r_pred(int j) const { return r_pred_[j]; }
  const Matrix& chol_obs_lower(int j) const { return chol_obs_[j]; }

 private:
  int n_obs_ = 0;
  int n_pred_ = 0;
  std::vector<Matrix> r_obs_;
  std::vector<Matrix> r_obs_pred_;
  std::vector<Matrix> r_pred_;
  std::vector<Matrix> chol_obs_;
};

// The conditional distribution at the prediction locations is again an LMC
// with the same coregionalization matrix; `mean` is the kriging mean and
// cond_corr the per-process conditional correlation matrices.
struct ConditionalLmc {
  Matrix mean;                     // p x n_pred
  std::vector<Matrix> cond_corr;   // each n_pred x n_pred, PSD
};

ConditionalLmc conditional_lmc(const CoregState& state,
                               const PartitionedCorr& part,
                               const LatentField& v_obs);

// Exact conditional draw via the whiten-condition-color route: whiten the
// observed field, draw each independent row from its Gaussian conditional,
// transform back.
LatentField predict_draw(const CoregState& state, const PartitionedCorr& part,
                         const LatentField& v_obs, Rng& rng);

struct PredictionSummary {
  Matrix mean;  // p x n_pred, average of per-sample kriging means
  Matrix q05;
  Matrix q95;
};

// Pointwise posterior summaries of the kriging means across posterior
// samples. Correlation blocks are cached keyed on the bit pattern of phi, so
// repeated range values (Metropolis rejections) cost nothing.
PredictionSummary posterior_predict(const std::vector<ChainRecord>& chain,
                                    const std::vector<LatentField>& v_chain,
                                    const Locations& locs_obs,
                                    const Locations& locs_new,
                                    CorrelationFamily family,
                                    double jitter = 0.0);

// Root mean squared prediction error with the squared error averaged over
// grid locations, components and posterior samples.
double posterior_predict_rmse(const std::vector<ChainRecord>& chain,
                              const std::vector<LatentField>& v_chain,
                              const Locations& locs_obs,
                              const Locations& locs_new, const Matrix& truth,
                              CorrelationFamily family, double jitter = 0.0);

}  // namespace lmc
