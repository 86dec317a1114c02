#include "lmc/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lmc {

void SamplerConfig::validate() const {
  if (iters < 0 || burnin < 0 || burnin > iters)
    throw std::invalid_argument("sampler config: need 0 <= burnin <= iters");
  if (mh_step < 0.0)
    throw std::invalid_argument("sampler config: mh_step must be >= 0");
  if (slice_width <= 0.0 || slice_max_steps < 1)
    throw std::invalid_argument("sampler config: bad slice parameters");
  if (rj_moves_per_iter < 0)
    throw std::invalid_argument("sampler config: rj_moves_per_iter < 0");
  if (jitter < 0.0 || jitter > 1e-8)
    throw std::invalid_argument("sampler config: jitter outside [0, 1e-8]");
}

// ---------------------------------------------------------------- latent --

namespace {

// Precision and linear term of site i's full conditional, given the running
// whitened products u = A^{-1} (V - mu 1^T).
void site_precision_linear(int i, const Matrix& u, const ObservedData& y,
                           const CoregState& state, const SpatialCorrSet& corr,
                           const NoiseParams& tau, const MeanParams& mu,
                           Matrix* q, Vector* b) {
  const int p = state.dim();
  const Matrix& g = state.inverse();
  *q = Matrix::Zero(p, p);
  *b = Vector::Zero(p);
  for (int j = 0; j < p; ++j) {
    const Matrix& rinv = corr.r_inv(j);
    const double diag = rinv(i, i);
    const double cross = rinv.row(i).dot(u.row(j)) - diag * u(j, i);
    *q += diag * (g.row(j).transpose() * g.row(j));
    *b -= cross * g.row(j).transpose();
  }
  for (int j = 0; j < p; ++j) {
    if (!y.observed(j, i)) continue;
    (*q)(j, j) += 1.0 / tau[j];
    (*b)[j] += (y.y(j, i) - mu[j]) / tau[j];
  }
}

}  // namespace

void update_latent(LatentField& v, const ObservedData& y,
                   const CoregState& state, const SpatialCorrSet& corr,
                   const NoiseParams& tau, const MeanParams& mu, Rng& rng) {
  const int p = state.dim();
  const int n = corr.n();
  if (v.rows() != p || v.cols() != n)
    throw std::invalid_argument("update_latent: V shape mismatch");
  const Matrix& g = state.inverse();
  Matrix centered = v.colwise() - mu;
  Matrix u = g * centered;

  Matrix q;
  Vector b;
  Vector z(p);
  for (int i = 0; i < n; ++i) {
    site_precision_linear(i, u, y, state, corr, tau, mu, &q, &b);
    Eigen::LLT<Matrix> llt(q);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("update_latent: site precision not PD");
    const Vector mean = llt.solve(b);
    for (int j = 0; j < p; ++j) z[j] = rng.normal();
    const Vector draw = mean + llt.matrixU().solve(z);
    centered.col(i) = draw;
    u.col(i) = g * draw;
  }
  v = centered.colwise() + mu;
}

void latent_site_conditional(int site, const LatentField& v,
                             const ObservedData& y, const CoregState& state,
                             const SpatialCorrSet& corr, const NoiseParams& tau,
                             const MeanParams& mu, Vector* mean,
                             Matrix* precision) {
  const Matrix centered = v.colwise() - mu;
  const Matrix u = state.inverse() * centered;
  Vector b;
  site_precision_linear(site, u, y, state, corr, tau, mu, precision, &b);
  Eigen::LLT<Matrix> llt(*precision);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("latent_site_conditional: precision not PD");
  *mean = llt.solve(b) + mu;
}

// ------------------------------------------------------------ slice on A --

namespace {

// One univariate slice-sampling transition (Neal-style stepping out with a
// total expansion budget, then shrinkage).
template <typename LogF>
double slice_sample_once(const LogF& logf, double x0, double width,
                         int max_steps, Rng& rng) {
  const double f0 = logf(x0);
  double u;
  do {
    u = rng.uniform();
  } while (u <= 0.0);
  const double log_y = f0 + std::log(u);

  const double r = rng.uniform();
  double left = x0 - r * width;
  double right = left + width;
  int left_budget = static_cast<int>(std::floor(max_steps * rng.uniform()));
  int right_budget = max_steps - 1 - left_budget;
  while (left_budget-- > 0 && logf(left) > log_y) left -= width;
  while (right_budget-- > 0 && logf(right) > log_y) right += width;

  for (int guard = 0; guard < 1000; ++guard) {
    const double x1 = rng.uniform(left, right);
    if (logf(x1) >= log_y) return x1;
    if (x1 < x0)
      left = x1;
    else
      right = x1;
  }
  return x0;  // interval shrank to numerical nothing; keep the current point
}

}  // namespace

CoregState update_coreg_slice(const CoregState& state,
                              const std::vector<Matrix>& gram, int n,
                              const PriorSpec& prior, const SamplerConfig& cfg,
                              Rng& rng) {
  CoregState cur = state;
  const int p = cur.dim();
  const double inv_var = 1.0 / (prior.a_sd * prior.a_sd);
  Matrix effective = cur.coreg();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (cur.mask()(i, j) != 1) continue;
      const auto logf = [&](double x) {
        effective(i, j) = x;
        const double t = coreg_log_target(effective, gram, n);
        return t - 0.5 * x * x * inv_var;
      };
      const double x0 = cur.coreg()(i, j);
      const double x1 =
          slice_sample_once(logf, x0, cfg.slice_width, cfg.slice_max_steps, rng);
      effective(i, j) = x1;
      if (x1 != x0) cur.set_entry(i, j, x1);
    }
  return cur;
}

CoregState update_coreg_slice(const CoregState& state, const LatentField& v,
                              const SpatialCorrSet& corr, const MeanParams& mu,
                              const PriorSpec& prior, const SamplerConfig& cfg,
                              Rng& rng) {
  return update_coreg_slice(state, lmc_gram(v, mu, corr), corr.n(), prior, cfg,
                            rng);
}

// ------------------------------------------------- conjugate A, given W --

std::vector<CoregRowPosterior> coreg_conjugate_posterior(
    const IntMatrix& mask, const LatentField& w, const ObservedData& y,
    const NoiseParams& tau, const MeanParams& mu, const PriorSpec& prior) {
  const int p = static_cast<int>(mask.rows());
  const int n = static_cast<int>(w.cols());
  if (w.rows() != p || y.p() != p || y.n() != n)
    throw std::invalid_argument("coreg conjugate: shape mismatch");
  const double prior_prec = 1.0 / (prior.a_sd * prior.a_sd);

  std::vector<CoregRowPosterior> rows;
  rows.reserve(p);
  for (int j = 0; j < p; ++j) {
    CoregRowPosterior row;
    for (int k = 0; k < p; ++k)
      if (mask(j, k) == 1) row.free_cols.push_back(k);
    const int f = static_cast<int>(row.free_cols.size());
    row.precision = Matrix::Identity(f, f) * prior_prec;
    Vector xty = Vector::Zero(f);
    const double inv_tau = 1.0 / tau[j];
    Vector x(f);
    for (int i = 0; i < n; ++i) {
      if (!y.observed(j, i)) continue;
      for (int k = 0; k < f; ++k) x[k] = w(row.free_cols[k], i);
      row.precision += inv_tau * (x * x.transpose());
      xty += inv_tau * (y.y(j, i) - mu[j]) * x;
    }
    row.mean = row.precision.llt().solve(xty);
    rows.push_back(std::move(row));
  }
  return rows;
}

CoregState update_coreg_conjugate_given_w(const CoregState& state,
                                          const LatentField& w,
                                          const ObservedData& y,
                                          const NoiseParams& tau,
                                          const MeanParams& mu,
                                          const PriorSpec& prior, Rng& rng) {
  const auto rows =
      coreg_conjugate_posterior(state.mask(), w, y, tau, mu, prior);
  // The exact draw lands on a singular matrix with probability zero; retry
  // on numerical failure.
  for (int attempt = 0; attempt < 16; ++attempt) {
    Matrix a = state.coreg();
    for (int j = 0; j < state.dim(); ++j) {
      const auto& row = rows[static_cast<size_t>(j)];
      Eigen::LLT<Matrix> llt(row.precision);
      Vector z(row.mean.size());
      for (int k = 0; k < z.size(); ++k) z[k] = rng.normal();
      const Vector draw = row.mean + llt.matrixU().solve(z);
      for (size_t k = 0; k < row.free_cols.size(); ++k)
        a(j, row.free_cols[k]) = draw[static_cast<int>(k)];
    }
    auto next = CoregState::try_make(std::move(a), state.mask());
    if (next) return *std::move(next);
  }
  throw std::runtime_error(
      "conjugate coregionalization update kept producing singular draws");
}

// ------------------------------------------------------------- ranges MH --

double reflect_into(double x, double lo, double hi) {
  const double range = hi - lo;
  double t = std::fmod(x - lo, 2.0 * range);
  if (t < 0.0) t += 2.0 * range;
  return t <= range ? lo + t : hi - (t - range);
}

namespace {

// -1/2 sum_j a_j^{-1} (V-mu 1^T) R_j^{-1} (V-mu 1^T)^T a_j^{-T} and the
// -1/2 sum_j log det R_j normalization; the phi-dependent part of Eq. (15).
double range_loglik_term(const LatentField& centered, const CoregState& state,
                         const SpatialCorrSet& corr) {
  const Matrix u = state.inverse() * centered;
  double quad = 0.0;
  for (int j = 0; j < state.dim(); ++j) {
    const Vector x = corr.chol_lower(j)
                         .triangularView<Eigen::Lower>()
                         .solve(u.row(j).transpose());
    quad += x.squaredNorm();
  }
  return -0.5 * quad - 0.5 * corr.log_det_sum();
}

}  // namespace

RangeUpdate update_ranges_mh(const RangeParams& phi, const SpatialCorrSet& corr,
                             const CoregState& state, const LatentField& v,
                             const MeanParams& mu, const Locations& locs,
                             const PriorSpec& prior, const SamplerConfig& cfg,
                             Rng& rng) {
  const int p = static_cast<int>(phi.size());
  const Matrix centered = v.colwise() - mu;
  RangeUpdate out;
  out.phi = phi;

  if (!cfg.phi_per_component) {
    RangeParams proposal(p);
    for (int j = 0; j < p; ++j)
      proposal[j] = reflect_into(phi[j] + cfg.mh_step * rng.normal(),
                                 prior.phi_min, prior.phi_max);
    out.proposed = 1;
    const double u = rng.uniform();
    try {
      SpatialCorrSet cand(locs, proposal, corr.family(), corr.jitter());
      const double log_ratio = range_loglik_term(centered, state, cand) -
                               range_loglik_term(centered, state, corr);
      if (std::log(u) < log_ratio) {
        out.phi = proposal;
        out.corr = std::move(cand);
        out.accepted = 1;
      }
    } catch (const std::runtime_error&) {
      // factorization failure of a proposed correlation matrix: reject
    }
    return out;
  }

  // Per-component mode: propose each phi_j in turn, rebuilding only R_j.
  RangeParams current = phi;
  bool any_accepted = false;
  for (int j = 0; j < p; ++j) {
    const double prop =
        reflect_into(current[j] + cfg.mh_step * rng.normal(), prior.phi_min,
                     prior.phi_max);
    ++out.proposed;
    const double u = rng.uniform();
    RangeParams cand_phi = current;
    cand_phi[j] = prop;
    try {
      SpatialCorrSet cand(locs, cand_phi, corr.family(), corr.jitter());
      const SpatialCorrSet& base =
          out.corr ? *out.corr : corr;  // caches for the current point
      const double log_ratio = range_loglik_term(centered, state, cand) -
                               range_loglik_term(centered, state, base);
      if (std::log(u) < log_ratio) {
        current = cand_phi;
        out.corr = std::move(cand);
        ++out.accepted;
        any_accepted = true;
      }
    } catch (const std::runtime_error&) {
    }
  }
  out.phi = current;
  if (!any_accepted) out.corr.reset();
  return out;
}

// ------------------------------------------------------------------- tau --

std::vector<std::pair<double, double>> tau_posterior_params(
    const PriorSpec& prior, const LatentField& v, const ObservedData& y) {
  if (y.p() != v.rows() || y.n() != v.cols())
    throw std::invalid_argument("tau update: shape mismatch");
  std::vector<std::pair<double, double>> params;
  params.reserve(v.rows());
  for (int j = 0; j < v.rows(); ++j) {
    int count = 0;
    double ss = 0.0;
    for (int i = 0; i < v.cols(); ++i) {
      if (!y.observed(j, i)) continue;
      const double resid = y.y(j, i) - v(j, i);
      ss += resid * resid;
      ++count;
    }
    params.emplace_back(prior.tau_shape + 0.5 * count,
                        prior.tau_scale + 0.5 * ss);
  }
  return params;
}

NoiseParams update_tau_conjugate(const PriorSpec& prior, const LatentField& v,
                                 const ObservedData& y, Rng& rng) {
  const auto params = tau_posterior_params(prior, v, y);
  NoiseParams tau(v.rows());
  for (int j = 0; j < v.rows(); ++j)
    tau[j] = rng.inv_gamma(params[static_cast<size_t>(j)].first,
                           params[static_cast<size_t>(j)].second);
  return tau;
}

// -------------------------------------------------------------------- mu --

MuPosterior mu_conjugate_posterior(const PriorSpec& prior, const LatentField& v,
                                   const CoregState& state,
                                   const SpatialCorrSet& corr) {
  const int p = state.dim();
  const Matrix& g = state.inverse();
  const Vector ones = Vector::Ones(corr.n());
  MuPosterior out;
  out.precision = Matrix::Identity(p, p) / prior.mu_var;
  Vector b = Vector::Zero(p);
  for (int j = 0; j < p; ++j) {
    const Vector rinv_one = corr.r_inv(j) * ones;
    const double e_j = ones.dot(rinv_one);
    const Vector v_rinv_one = v * rinv_one;
    const double c_j = g.row(j).dot(v_rinv_one);
    out.precision += e_j * (g.row(j).transpose() * g.row(j));
    b += c_j * g.row(j).transpose();
  }
  out.mean = out.precision.llt().solve(b);
  return out;
}

MeanParams update_mu_conjugate(const PriorSpec& prior, const LatentField& v,
                               const CoregState& state,
                               const SpatialCorrSet& corr, Rng& rng) {
  const MuPosterior post = mu_conjugate_posterior(prior, v, state, corr);
  Eigen::LLT<Matrix> llt(post.precision);
  Vector z(post.mean.size());
  for (int k = 0; k < z.size(); ++k) z[k] = rng.normal();
  return post.mean + llt.matrixU().solve(z);
}

// ---------------------------------------------------------------- engine --

namespace {

struct ChainState {
  CoregState state;
  RangeParams phi;
  SpatialCorrSet corr;
  NoiseParams tau;
  MeanParams mu;
  LatentField v;
};

ChainState initialize(const ObservedData& y, const Locations& locs,
                      const PriorSpec& prior, const SamplerConfig& cfg,
                      const SamplerInit& init, Rng& rng) {
  const int p = y.p();
  const int n = y.n();
  Matrix a = init.a.value_or(Matrix::Identity(p, p));
  IntMatrix mask = init.mask.value_or(IntMatrix::Constant(p, p, 1));
  if (!is_admissible(mask))
    throw std::invalid_argument("sampler init: inadmissible mask");
  CoregState state(std::move(a), std::move(mask));

  RangeParams phi;
  if (init.phi) {
    phi = *init.phi;
    validate_ranges(phi, prior);
  } else {
    phi = RangeParams(p);
    for (int j = 0; j < p; ++j)
      phi[j] = rng.uniform(prior.phi_min, prior.phi_max);
  }
  NoiseParams tau = init.tau.value_or(NoiseParams::Ones(p));
  validate_noise(tau);
  MeanParams mu = init.mu.value_or(MeanParams::Zero(p));

  LatentField v;
  if (init.v) {
    v = *init.v;
    if (v.rows() != p || v.cols() != n)
      throw std::invalid_argument("sampler init: V shape mismatch");
  } else {
    v = Matrix(p, n);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i)
        v(j, i) = y.observed(j, i) ? y.y(j, i) : mu[j];
  }

  SpatialCorrSet corr(locs, phi, CorrelationFamily::kExponential, cfg.jitter);
  return ChainState{std::move(state), std::move(phi), std::move(corr),
                    std::move(tau),   std::move(mu),  std::move(v)};
}

void check_cache_coherence(const ChainState& chain, const ObservedData& y,
                           const Locations& locs, const SamplerConfig& cfg,
                           double cached_loglik) {
  const SpatialCorrSet fresh_corr(locs, chain.phi,
                                  CorrelationFamily::kExponential, cfg.jitter);
  const CoregState fresh_state(chain.state.coreg(), chain.state.mask());
  const double fresh = complete_loglik_centered(y, chain.v, fresh_state,
                                                fresh_corr, chain.tau, chain.mu);
  if (std::abs(fresh - cached_loglik) > 1e-8 * (1.0 + std::abs(fresh)))
    throw std::logic_error("cache drift: stored factorizations disagree with "
                           "a from-scratch recomputation");
}

McmcResult run_engine(const ObservedData& y, const Locations& locs,
                      const PriorSpec& prior, const SamplerConfig& cfg,
                      const SamplerInit& init, const RecordCallback& on_record) {
  prior.validate();
  cfg.validate();
  const int p = y.p();
  const int n = y.n();
  const double pi = prior.pi(p);
  const bool sparse = cfg.mode == SamplerMode::kSparse;
  const bool centered_step = cfg.mode != SamplerMode::kInterweaveWhitened;
  const bool whitened_step = cfg.mode == SamplerMode::kInterweaveWhitened ||
                             cfg.mode == SamplerMode::kInterweaveBoth;
  const int rj_moves = cfg.rj_moves_per_iter > 0 ? cfg.rj_moves_per_iter : p;

  Rng rng(cfg.seed);
  ChainState chain = initialize(y, locs, prior, cfg, init, rng);

  McmcResult result;
  result.records.reserve(cfg.iters - cfg.burnin);
  long phi_accepted = 0, phi_proposed = 0;
  long rj_accepted = 0, rj_proposed = 0;

  for (int iter = 0; iter < cfg.iters; ++iter) {
    if (cfg.sample_latent)
      update_latent(chain.v, y, chain.state, chain.corr, chain.tau, chain.mu,
                    rng);
    // Valid through every coregionalization evaluation this iteration: the
    // range update (which would invalidate it) comes after them.
    std::vector<Matrix> gram = lmc_gram(chain.v, chain.mu, chain.corr);

    if (cfg.sample_coreg) {
      if (sparse) {
        for (int move = 0; move < rj_moves; ++move) {
          RjProposal prop = propose_rj(chain.state, pi, prior.a_sd, rng);
          ++rj_proposed;
          if (prop.auto_reject) continue;
          const double delta =
              coreg_log_target(prop.state->coreg(), gram, n) -
              coreg_log_target(chain.state.coreg(), gram, n) +
              prop.log_prior_adjust;
          double u;
          do {
            u = rng.uniform();
          } while (u <= 0.0);
          if (std::log(u) < delta) {
            chain.state = *std::move(prop.state);
            ++rj_accepted;
          }
        }
      }
      if (centered_step)
        chain.state = update_coreg_slice(chain.state, gram, n, prior, cfg, rng);
      if (whitened_step) {
        const Matrix centered = chain.v.colwise() - chain.mu;
        const Matrix w = chain.state.inverse() * centered;
        if (cfg.check_caches) {
          // The whitening relink must reproduce the centered field.
          const double err =
              (chain.state.coreg() * w - centered).cwiseAbs().maxCoeff();
          if (err > 1e-10 * (1.0 + centered.cwiseAbs().maxCoeff()))
            throw std::logic_error("relink drift: (A o M) W != V");
        }
        chain.state = update_coreg_conjugate_given_w(chain.state, w, y,
                                                     chain.tau, chain.mu,
                                                     prior, rng);
        chain.v = (chain.state.coreg() * w).colwise() + chain.mu;
      }
    }

    if (cfg.sample_ranges) {
      RangeUpdate ru = update_ranges_mh(chain.phi, chain.corr, chain.state,
                                        chain.v, chain.mu, locs, prior, cfg,
                                        rng);
      phi_accepted += ru.accepted;
      phi_proposed += ru.proposed;
      chain.phi = ru.phi;
      if (ru.corr) chain.corr = *std::move(ru.corr);
    }

    if (cfg.sample_tau)
      chain.tau = update_tau_conjugate(prior, chain.v, y, rng);
    if (cfg.sample_mu)
      chain.mu = update_mu_conjugate(prior, chain.v, chain.state, chain.corr,
                                     rng);

    if (iter >= cfg.burnin) {
      ChainRecord rec;
      rec.a = chain.state.coreg();
      rec.m = chain.state.mask();
      rec.phi = chain.phi;
      rec.tau = chain.tau;
      rec.mu = chain.mu;
      rec.loglik = complete_loglik_centered(y, chain.v, chain.state, chain.corr,
                                            chain.tau, chain.mu);
      if (cfg.check_caches)
        check_cache_coherence(chain, y, locs, cfg, rec.loglik);
      if (on_record) on_record(rec);
      result.records.push_back(std::move(rec));
      result.latents.push_back(chain.v);
    }
  }

  result.phi_accept_rate =
      phi_proposed > 0 ? static_cast<double>(phi_accepted) / phi_proposed : 0.0;
  result.rj_accept_rate =
      rj_proposed > 0 ? static_cast<double>(rj_accepted) / rj_proposed : 0.0;
  return result;
}

}  // namespace

McmcResult run_standard(const ObservedData& y, const Locations& locs,
                        const PriorSpec& prior, const SamplerConfig& cfg,
                        const SamplerInit& init, const RecordCallback& on_record) {
  SamplerConfig local = cfg;
  local.mode = SamplerMode::kStandard;
  return run_engine(y, locs, prior, local, init, on_record);
}

McmcResult run_sparse(const ObservedData& y, const Locations& locs,
                      const PriorSpec& prior, const SamplerConfig& cfg,
                      const SamplerInit& init, const RecordCallback& on_record) {
  SamplerConfig local = cfg;
  local.mode = SamplerMode::kSparse;
  return run_engine(y, locs, prior, local, init, on_record);
}

McmcResult run_interweaving(const ObservedData& y, const Locations& locs,
                            const PriorSpec& prior, const SamplerConfig& cfg,
                            const SamplerInit& init,
                            const RecordCallback& on_record) {
  if (cfg.mode != SamplerMode::kInterweaveCentered &&
      cfg.mode != SamplerMode::kInterweaveWhitened &&
      cfg.mode != SamplerMode::kInterweaveBoth)
    throw std::invalid_argument("run_interweaving: not an interweaving mode");
  return run_engine(y, locs, prior, cfg, init, on_record);
}

McmcResult run_chain(const ObservedData& y, const Locations& locs,
                     const PriorSpec& prior, const SamplerConfig& cfg,
                     const SamplerInit& init, const RecordCallback& on_record) {
  return run_engine(y, locs, prior, cfg, init, on_record);
}

// ----------------------------------------------------------- diagnostics --

double effective_sample_size(const std::vector<double>& series) {
  const size_t n = series.size();
  if (n < 10)
    throw std::invalid_argument("effective_sample_size: need length >= 10");
  bool constant = true;
  for (double x : series) constant = constant && x == series.front();
  if (constant) return static_cast<double>(n);  // documented convention

  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);

  const auto gamma_at = [&](size_t k) {
    double s = 0.0;
    for (size_t t = 0; t + k < n; ++t)
      s += (series[t] - mean) * (series[t + k] - mean);
    return s / static_cast<double>(n);
  };

  const double gamma0 = gamma_at(0);
  if (gamma0 <= 0.0) return static_cast<double>(n);

  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (size_t m = 0;; ++m) {
    const size_t k1 = 2 * m, k2 = 2 * m + 1;
    if (k2 >= n) break;
    double pair = gamma_at(k1) + gamma_at(k2);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);  // enforce monotonicity
    prev = pair;
    sum += pair;
  }
  const double asym_var = -gamma0 + 2.0 * sum;
  if (asym_var <= 0.0) return static_cast<double>(n);
  return std::min(static_cast<double>(n),
                  static_cast<double>(n) * gamma0 / asym_var);
}

double sample_quantile(std::vector<double> values, double q) {
  if (values.empty())
    throw std::invalid_argument("sample_quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double idx = q * (static_cast<double>(values.size()) - 1.0);
  const size_t lo = static_cast<size_t>(std::floor(idx));
  const size_t hi = static_cast<size_t>(std::ceil(idx));
  const double frac = idx - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

ChainSummaries chain_summaries(const std::vector<ChainRecord>& records,
                               const std::vector<double>& distances,
                               CorrelationFamily family) {
  if (records.empty())
    throw std::invalid_argument("chain_summaries: empty chain");
  const int p = static_cast<int>(records.front().a.rows());
  const size_t n_rec = records.size();
  const size_t n_dist = distances.size();

  std::vector<std::vector<double>> cov_samples(static_cast<size_t>(p) * p);
  std::vector<std::vector<std::vector<double>>> cross_samples(
      n_dist, std::vector<std::vector<double>>(static_cast<size_t>(p) * p));
  Matrix indep = Matrix::Zero(p, p);
  std::vector<double> nonzeros, logliks;
  std::vector<std::vector<double>> c0(static_cast<size_t>(p) * p);
  nonzeros.reserve(n_rec);
  logliks.reserve(n_rec);

  for (const ChainRecord& rec : records) {
    const auto [canon, canon_phi] = canonicalize(CoregState(rec.a, rec.m), rec.phi);
    const Matrix cov = marginal_covariance(canon);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        cov_samples[static_cast<size_t>(i) * p + j].push_back(cov(i, j));
    for (size_t d = 0; d < n_dist; ++d) {
      const Matrix cross = cross_covariance(canon, canon_phi, family, distances[d]);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          cross_samples[d][static_cast<size_t>(i) * p + j].push_back(cross(i, j));
    }
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        if (i != j && independence_indicator(rec.m, i, j)) indep(i, j) += 1.0;
    nonzeros.push_back(static_cast<double>(rec.m.sum()));
    logliks.push_back(rec.loglik);
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j)
        c0[static_cast<size_t>(i) * p + j].push_back(
            rec.a.row(i).dot(rec.a.row(j)));
  }

  ChainSummaries out;
  out.distances = distances;
  out.cov_median = Matrix(p, p);
  out.cov_q05 = Matrix(p, p);
  out.cov_q95 = Matrix(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      auto& s = cov_samples[static_cast<size_t>(i) * p + j];
      out.cov_median(i, j) = sample_quantile(s, 0.5);
      out.cov_q05(i, j) = sample_quantile(s, 0.05);
      out.cov_q95(i, j) = sample_quantile(s, 0.95);
    }
  for (size_t d = 0; d < n_dist; ++d) {
    Matrix med(p, p), lo(p, p), hi(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        auto& s = cross_samples[d][static_cast<size_t>(i) * p + j];
        med(i, j) = sample_quantile(s, 0.5);
        lo(i, j) = sample_quantile(s, 0.05);
        hi(i, j) = sample_quantile(s, 0.95);
      }
    out.cross_median.push_back(std::move(med));
    out.cross_q05.push_back(std::move(lo));
    out.cross_q95.push_back(std::move(hi));
  }
  out.indep_prob = indep / static_cast<double>(n_rec);
  out.nonzero_mean = 0.0;
  for (double x : nonzeros) out.nonzero_mean += x;
  out.nonzero_mean /= static_cast<double>(n_rec);
  out.nonzero_median = sample_quantile(nonzeros, 0.5);
  out.nonzero_q05 = sample_quantile(nonzeros, 0.05);
  out.nonzero_q95 = sample_quantile(nonzeros, 0.95);
  out.ess_loglik =
      n_rec >= 10 ? effective_sample_size(logliks) : static_cast<double>(n_rec);
  out.ess_c0 = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const auto& s = c0[static_cast<size_t>(i) * p + j];
      out.ess_c0(i, j) = s.size() >= 10 ? effective_sample_size(s)
                                        : static_cast<double>(s.size());
    }
  return out;
}

}  // namespace lmc
