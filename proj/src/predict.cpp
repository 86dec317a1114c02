#include "lmc/predict.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace lmc {

PartitionedCorr::PartitionedCorr(const Locations& obs, const Locations& pred,
                                 const RangeParams& phi,
                                 CorrelationFamily family, double jitter)
    : n_obs_(obs.size()), n_pred_(pred.size()) {
  const int p = static_cast<int>(phi.size());
  if (p < 1) throw std::invalid_argument("partitioned corr: empty phi");
  r_obs_.reserve(p);
  r_obs_pred_.reserve(p);
  r_pred_.reserve(p);
  chol_obs_.reserve(p);
  for (int j = 0; j < p; ++j) {
    Matrix ro(n_obs_, n_obs_);
    for (int i = 0; i < n_obs_; ++i) {
      ro(i, i) = 1.0 + jitter;
      for (int k = i + 1; k < n_obs_; ++k) {
        const double rho = correlation(family, phi[j], obs.distance(i, k));
        ro(i, k) = rho;
        ro(k, i) = rho;
      }
    }
    Matrix rop(n_obs_, n_pred_);
    for (int i = 0; i < n_obs_; ++i)
      for (int k = 0; k < n_pred_; ++k)
        rop(i, k) = correlation(
            family, phi[j],
            (obs.points().row(i) - pred.points().row(k)).norm());
    Matrix rp(n_pred_, n_pred_);
    for (int i = 0; i < n_pred_; ++i) {
      rp(i, i) = 1.0 + jitter;
      for (int k = i + 1; k < n_pred_; ++k) {
        const double rho = correlation(family, phi[j], pred.distance(i, k));
        rp(i, k) = rho;
        rp(k, i) = rho;
      }
    }
    Eigen::LLT<Matrix> llt(ro);
    if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "partitioned corr: observed block " << j
          << " not positive definite (duplicated locations?)";
      throw std::runtime_error(msg.str());
    }
    r_obs_.push_back(std::move(ro));
    r_obs_pred_.push_back(std::move(rop));
    r_pred_.push_back(std::move(rp));
    chol_obs_.push_back(Matrix(llt.matrixL()));
  }
}

ConditionalLmc conditional_lmc(const CoregState& state,
                               const PartitionedCorr& part,
                               const LatentField& v_obs) {
  const int p = state.dim();
  if (part.p() != p)
    throw std::invalid_argument("conditional_lmc: corr/state p mismatch");
  if (v_obs.rows() != p || v_obs.cols() != part.n_obs())
    throw std::invalid_argument("conditional_lmc: v_obs shape mismatch");

  // Whitened observed rows w_j = a_j^{-1} V_obs.
  const Matrix w = state.inverse() * v_obs;
  Matrix krig(p, part.n_pred());
  std::vector<Matrix> cond;
  cond.reserve(p);
  for (int j = 0; j < p; ++j) {
    const auto& lower = part.chol_obs_lower(j);
    const Vector alpha = lower.transpose().triangularView<Eigen::Upper>().solve(
        lower.triangularView<Eigen::Lower>().solve(w.row(j).transpose()));
    krig.row(j) = alpha.transpose() * part.r_obs_pred(j);
    const Matrix half =
        lower.triangularView<Eigen::Lower>().solve(part.r_obs_pred(j));
    cond.push_back(part.r_pred(j) - half.transpose() * half);
  }
  return ConditionalLmc{state.coreg() * krig, std::move(cond)};
}

namespace {

// Square root of a PSD matrix that tolerates exact semidefiniteness: plain
// Cholesky when it succeeds, otherwise an eigendecomposition with tiny
// negative eigenvalues clamped to zero.
Matrix psd_sqrt(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector vals = es.eigenvalues();
  const double floor = -1e-8 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  for (int i = 0; i < vals.size(); ++i) {
    if (vals[i] < floor)
      throw std::runtime_error("conditional correlation matrix not PSD");
    vals[i] = std::max(vals[i], 0.0);
  }
  return es.eigenvectors() * vals.cwiseSqrt().asDiagonal();
}

}  // namespace

LatentField predict_draw(const CoregState& state, const PartitionedCorr& part,
                         const LatentField& v_obs, Rng& rng) {
  const int p = state.dim();
  const Matrix w_obs = state.inverse() * v_obs;
  Matrix w_pred(p, part.n_pred());
  for (int j = 0; j < p; ++j) {
    Rng row_rng = rng.stream(j);
    const auto& lower = part.chol_obs_lower(j);
    const Vector alpha = lower.transpose().triangularView<Eigen::Upper>().solve(
        lower.triangularView<Eigen::Lower>().solve(w_obs.row(j).transpose()));
    const Vector mean = part.r_obs_pred(j).transpose() * alpha;
    const Matrix half =
        lower.triangularView<Eigen::Lower>().solve(part.r_obs_pred(j));
    const Matrix cond = part.r_pred(j) - half.transpose() * half;
    const Matrix root = psd_sqrt(cond);
    Vector z(root.cols());
    for (int i = 0; i < z.size(); ++i) z[i] = row_rng.normal();
    w_pred.row(j) = (mean + root * z).transpose();
  }
  return state.coreg() * w_pred;
}

namespace {

std::string phi_bits_key(const Vector& phi) {
  std::string key(static_cast<size_t>(phi.size()) * sizeof(double), '\0');
  std::memcpy(key.data(), phi.data(), key.size());
  return key;
}

double quantile_sorted(std::vector<double>& values, double q) {
  std::sort(values.begin(), values.end());
  const double idx = q * (static_cast<double>(values.size()) - 1.0);
  const size_t lo = static_cast<size_t>(std::floor(idx));
  const size_t hi = static_cast<size_t>(std::ceil(idx));
  const double frac = idx - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

// Shared iteration over per-sample kriging means with correlation blocks
// cached per distinct phi.
template <typename Visit>
void for_each_kriging_mean(const std::vector<ChainRecord>& chain,
                           const std::vector<LatentField>& v_chain,
                           const Locations& locs_obs, const Locations& locs_new,
                           CorrelationFamily family, double jitter,
                           Visit&& visit) {
  if (chain.empty()) throw std::invalid_argument("posterior_predict: empty chain");
  if (chain.size() != v_chain.size())
    throw std::invalid_argument(
        "posterior_predict: chain and latent draws differ in length");
  std::unordered_map<std::string, std::shared_ptr<PartitionedCorr>> cache;
  for (size_t s = 0; s < chain.size(); ++s) {
    const ChainRecord& rec = chain[s];
    auto& slot = cache[phi_bits_key(rec.phi)];
    if (!slot)
      slot = std::make_shared<PartitionedCorr>(locs_obs, locs_new, rec.phi,
                                               family, jitter);
    const CoregState state(rec.a, rec.m);
    visit(conditional_lmc(state, *slot, v_chain[s]).mean);
  }
}

}  // namespace

PredictionSummary posterior_predict(const std::vector<ChainRecord>& chain,
                                    const std::vector<LatentField>& v_chain,
                                    const Locations& locs_obs,
                                    const Locations& locs_new,
                                    CorrelationFamily family, double jitter) {
  if (chain.empty()) throw std::invalid_argument("posterior_predict: empty chain");
  const int p = static_cast<int>(chain.front().a.rows());
  const int n_new = locs_new.size();
  std::vector<std::vector<double>> samples(
      static_cast<size_t>(p) * n_new);
  for (auto& s : samples) s.reserve(chain.size());
  for_each_kriging_mean(chain, v_chain, locs_obs, locs_new, family, jitter,
                        [&](const Matrix& mean) {
                          for (int j = 0; j < p; ++j)
                            for (int i = 0; i < n_new; ++i)
                              samples[static_cast<size_t>(j) * n_new + i]
                                  .push_back(mean(j, i));
                        });
  PredictionSummary out;
  out.mean = Matrix(p, n_new);
  out.q05 = Matrix(p, n_new);
  out.q95 = Matrix(p, n_new);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n_new; ++i) {
      auto& vals = samples[static_cast<size_t>(j) * n_new + i];
      double sum = 0.0;
      for (double x : vals) sum += x;
      out.mean(j, i) = sum / static_cast<double>(vals.size());
      out.q05(j, i) = quantile_sorted(vals, 0.05);
      out.q95(j, i) = quantile_sorted(vals, 0.95);
    }
  return out;
}

double posterior_predict_rmse(const std::vector<ChainRecord>& chain,
                              const std::vector<LatentField>& v_chain,
                              const Locations& locs_obs,
                              const Locations& locs_new, const Matrix& truth,
                              CorrelationFamily family, double jitter) {
  if (truth.cols() != locs_new.size())
    throw std::invalid_argument("rmse: truth shape mismatch");
  double total = 0.0;
  size_t count = 0;
  for_each_kriging_mean(chain, v_chain, locs_obs, locs_new, family, jitter,
                        [&](const Matrix& mean) {
                          total += (mean - truth).squaredNorm();
                          count += static_cast<size_t>(mean.size());
                        });
  return std::sqrt(total / static_cast<double>(count));
}

}  // namespace lmc
