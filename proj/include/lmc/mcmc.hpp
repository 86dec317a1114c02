#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "lmc/core.hpp"
#include "lmc/density.hpp"
#include "lmc/rng.hpp"
#include "lmc/sparsity.hpp"

namespace lmc {

enum class SamplerMode {
  kStandard,
  kSparse,
  kInterweaveCentered,
  kInterweaveWhitened,
  kInterweaveBoth,
};

struct SamplerConfig {
  int iters = 2000;
  int burnin = 1000;
  std::uint64_t seed = 0;
  double mh_step = 1.0;            // range random-walk scale, reflective
  bool phi_per_component = false;  // default is one joint block move
  double slice_width = 1.0;
  int slice_max_steps = 10;
  int rj_moves_per_iter = 0;       // 0 means p moves per iteration
  SamplerMode mode = SamplerMode::kStandard;
  double jitter = 0.0;
  bool sample_mu = false;

  // Per-update switches; used by tests that hold parts of the state fixed.
  bool sample_latent = true;
  bool sample_coreg = true;
  bool sample_ranges = true;
  bool sample_tau = true;

  // Recompute every cached quantity from scratch at each retained iteration
  // and fail loudly on any drift.
  bool check_caches = false;

  void validate() const;
};

// Optional initial-state overrides; anything unset uses the defaults
// (identity coregionalization, all-ones mask, ranges drawn uniformly from
// their prior support, unit noise variances, zero means, latent field
// initialized from the observed cells).
struct SamplerInit {
  std::optional<Matrix> a;
  std::optional<IntMatrix> mask;
  std::optional<Vector> phi;
  std::optional<Vector> tau;
  std::optional<Vector> mu;
  std::optional<Matrix> v;
};

struct McmcResult {
  std::vector<ChainRecord> records;
  std::vector<LatentField> latents;
  double phi_accept_rate = 0.0;
  double rj_accept_rate = 0.0;
};

using RecordCallback = std::function<void(const ChainRecord&)>;

// ---- Individual updates (each leaves its full conditional invariant) ----

// One full sweep of the latent-field Gibbs update: site by site, each column
// v(s_i) is drawn from its p-variate Gaussian full conditional with precision
//   sum_j [R_j^{-1}]_ii a_j^{-T} a_j^{-1} + D^{-1} o diag(avail_i),
// the mean handled by centering V and Y at mu. The sweep reuses the running
// whitened products, so it costs O(p n^2 + n p^3) overall.
void update_latent(LatentField& v, const ObservedData& y,
                   const CoregState& state, const SpatialCorrSet& corr,
                   const NoiseParams& tau, const MeanParams& mu, Rng& rng);

// The (mean, precision) of one site's full conditional, for oracle tests.
void latent_site_conditional(int site, const LatentField& v,
                             const ObservedData& y, const CoregState& state,
                             const SpatialCorrSet& corr, const NoiseParams& tau,
                             const MeanParams& mu, Vector* mean,
                             Matrix* precision);

// Univariate stepping-out slice sampling applied to each free entry of the
// coregionalization matrix in row-major order, targeting the N(0, a_sd^2)
// prior times the centered LMC likelihood term evaluated from the cached
// Gram matrices (no O(n) work per evaluation). Masked cells never move.
CoregState update_coreg_slice(const CoregState& state,
                              const std::vector<Matrix>& gram, int n,
                              const PriorSpec& prior, const SamplerConfig& cfg,
                              Rng& rng);
CoregState update_coreg_slice(const CoregState& state, const LatentField& v,
                              const SpatialCorrSet& corr, const MeanParams& mu,
                              const PriorSpec& prior, const SamplerConfig& cfg,
                              Rng& rng);

// Exact Gaussian full conditional of the free coregionalization entries
// given the whitened field W: row j regresses (y_j - mu_j) on the rows of W
// over available cells with noise tau_j, combined with the N(0, a_sd^2)
// priors. Rows are conditionally independent.
struct CoregRowPosterior {
  std::vector<int> free_cols;
  Vector mean;        // over free columns
  Matrix precision;
};
std::vector<CoregRowPosterior> coreg_conjugate_posterior(
    const IntMatrix& mask, const LatentField& w, const ObservedData& y,
    const NoiseParams& tau, const MeanParams& mu, const PriorSpec& prior);
CoregState update_coreg_conjugate_given_w(const CoregState& state,
                                          const LatentField& w,
                                          const ObservedData& y,
                                          const NoiseParams& tau,
                                          const MeanParams& mu,
                                          const PriorSpec& prior, Rng& rng);

// Fold x into [lo, hi] by repeated boundary reflection.
double reflect_into(double x, double lo, double hi);

// Metropolis-Hastings update of the range parameters: a reflective Gaussian
// random walk, one joint block proposal by default (per-component moves via
// config). Accepted moves hand back the replacement correlation caches.
struct RangeUpdate {
  RangeParams phi;
  std::optional<SpatialCorrSet> corr;  // set only when something was accepted
  int accepted = 0;
  int proposed = 0;
};
RangeUpdate update_ranges_mh(const RangeParams& phi, const SpatialCorrSet& corr,
                             const CoregState& state, const LatentField& v,
                             const MeanParams& mu, const Locations& locs,
                             const PriorSpec& prior, const SamplerConfig& cfg,
                             Rng& rng);

// Conjugate inverse-gamma posterior parameters (shape, scale) per component:
// shape = tau_shape + n_j/2 over available cells, scale = tau_scale + SS_j/2.
std::vector<std::pair<double, double>> tau_posterior_params(
    const PriorSpec& prior, const LatentField& v, const ObservedData& y);
NoiseParams update_tau_conjugate(const PriorSpec& prior, const LatentField& v,
                                 const ObservedData& y, Rng& rng);

// Gaussian full conditional of the component means under the centered
// likelihood: precision sum_j (1^T R_j^{-1} 1) a_j^{-T} a_j^{-1} + I/mu_var.
struct MuPosterior {
  Vector mean;
  Matrix precision;
};
MuPosterior mu_conjugate_posterior(const PriorSpec& prior, const LatentField& v,
                                   const CoregState& state,
                                   const SpatialCorrSet& corr);
MeanParams update_mu_conjugate(const PriorSpec& prior, const LatentField& v,
                               const CoregState& state,
                               const SpatialCorrSet& corr, Rng& rng);

// ---- Samplers ----

// Gibbs sampler for the dense model: latent sweep, slice updates of the
// coregionalization entries, block Metropolis move on the ranges, conjugate
// noise variances (and conjugate means when enabled). The mask stays fixed
// (all ones unless overridden through `init`).
McmcResult run_standard(const ObservedData& y, const Locations& locs,
                        const PriorSpec& prior, const SamplerConfig& cfg,
                        const SamplerInit& init = {},
                        const RecordCallback& on_record = {});

// As run_standard with reversible-jump structure moves on the mask inserted
// before the slice updates; every retained mask is admissible.
McmcResult run_sparse(const ObservedData& y, const Locations& locs,
                      const PriorSpec& prior, const SamplerConfig& cfg,
                      const SamplerInit& init = {},
                      const RecordCallback& on_record = {});

// Interweaving sampler: the coregionalization matrix is updated under the
// centered parametrization (slice, given V), the whitened parametrization
// (exact Gaussian, given W), or both in turn, with deterministic relinks
// W = (A o M)^{-1} V and V = (A o M) W between steps.
McmcResult run_interweaving(const ObservedData& y, const Locations& locs,
                            const PriorSpec& prior, const SamplerConfig& cfg,
                            const SamplerInit& init = {},
                            const RecordCallback& on_record = {});

// Dispatch on cfg.mode.
McmcResult run_chain(const ObservedData& y, const Locations& locs,
                     const PriorSpec& prior, const SamplerConfig& cfg,
                     const SamplerInit& init = {},
                     const RecordCallback& on_record = {});

// ---- Diagnostics and summaries ----

// Effective sample size N / (1 + 2 sum rho_k) with autocovariances truncated
// by the initial-monotone-positive-sequence rule; clipped to (0, N]. A
// constant series reports N by convention.
double effective_sample_size(const std::vector<double>& series);

// Linear-interpolation sample quantile of an unsorted copy.
double sample_quantile(std::vector<double> values, double q);

struct ChainSummaries {
  std::vector<double> distances;
  // Marginal covariance (A o M)(A o M)^T, entrywise quantiles.
  Matrix cov_median, cov_q05, cov_q95;
  // Cross-covariance at each requested distance.
  std::vector<Matrix> cross_median, cross_q05, cross_q95;
  Matrix indep_prob;  // fraction of records with disjoint row supports
  double nonzero_mean = 0.0, nonzero_median = 0.0;
  double nonzero_q05 = 0.0, nonzero_q95 = 0.0;
  double ess_loglik = 0.0;
  Matrix ess_c0;  // ESS of the C_ij(0) series, upper triangle i < j
};

// Records are canonicalized (ascending phi, dominant-entry-positive columns)
// before summarizing.
ChainSummaries chain_summaries(const std::vector<ChainRecord>& records,
                               const std::vector<double>& distances,
                               CorrelationFamily family);

}  // namespace lmc
