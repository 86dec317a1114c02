#include "lmc/density.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lmc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_dims(const LatentField& v, const CoregState& state,
                const SpatialCorrSet& corr) {
  if (v.rows() != state.dim() || v.cols() != corr.n() ||
      state.dim() != corr.p()) {
    std::ostringstream msg;
    msg << "dimension mismatch: V is " << v.rows() << "x" << v.cols()
        << ", state p=" << state.dim() << ", corr n=" << corr.n()
        << " p=" << corr.p();
    throw std::invalid_argument(msg.str());
  }
}

void check_guard(int n, int p, int size_guard) {
  if (static_cast<long>(n) * p > size_guard) {
    std::ostringstream msg;
    msg << "dense form with np = " << n * p << " exceeds size guard "
        << size_guard;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

SpatialCorrSet::SpatialCorrSet(const Locations& locs, const RangeParams& phi,
                               CorrelationFamily family, double jitter)
    : n_(locs.size()), jitter_(jitter), family_(family) {
  if (phi.size() < 1) throw std::invalid_argument("corr set: empty phi");
  if (jitter < 0.0) throw std::invalid_argument("corr set: negative jitter");
  const int p = static_cast<int>(phi.size());
  r_.reserve(p);
  chol_.reserve(p);
  r_inv_.reserve(p);
  log_det_.reserve(p);
  for (int j = 0; j < p; ++j) {
    Matrix r(n_, n_);
    for (int i = 0; i < n_; ++i) {
      r(i, i) = 1.0 + jitter;
      for (int k = i + 1; k < n_; ++k) {
        const double rho = correlation(family, phi[j], locs.distance(i, k));
        r(i, k) = rho;
        r(k, i) = rho;
      }
    }
    Eigen::LLT<Matrix> llt(r);
    if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "Cholesky factorization failed for correlation matrix " << j
          << " (phi = " << phi[j] << "); consider a small jitter";
      throw std::runtime_error(msg.str());
    }
    Matrix lower = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < n_; ++i) log_det += 2.0 * std::log(lower(i, i));
    r_.push_back(std::move(r));
    r_inv_.push_back(llt.solve(Matrix::Identity(n_, n_)));
    chol_.push_back(std::move(lower));
    log_det_.push_back(log_det);
  }
}

double SpatialCorrSet::log_det_sum() const {
  double s = 0.0;
  for (double d : log_det_) s += d;
  return s;
}

double lmc_logpdf_matrix(const LatentField& v, const CoregState& state,
                         const SpatialCorrSet& corr) {
  check_dims(v, state, corr);
  const int n = corr.n();
  const int p = state.dim();

  // Rows of U are a_j^{-1} V; each quadratic form is computed by a
  // triangular solve against the cached Cholesky factor.
  const Matrix u = state.inverse() * v;
  double quad = 0.0;
  for (int j = 0; j < p; ++j) {
    const Vector x = corr.chol_lower(j)
                         .triangularView<Eigen::Lower>()
                         .solve(u.row(j).transpose());
    quad += x.squaredNorm();
  }
  return -0.5 * quad - 0.5 * n * p * kLog2Pi - n * state.log_abs_det() -
         0.5 * corr.log_det_sum();
}

Matrix dense_covariance(const CoregState& state, const SpatialCorrSet& corr,
                        int size_guard) {
  const int n = corr.n();
  const int p = state.dim();
  check_guard(n, p, size_guard);
  Matrix cov = Matrix::Zero(n * p, n * p);
  for (int j = 0; j < p; ++j) {
    const Matrix outer = state.coreg().col(j) * state.coreg().col(j).transpose();
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        cov.block(i * p, k * p, p, p) += corr.r(j)(i, k) * outer;
  }
  return cov;
}

double lmc_logpdf_naive(const LatentField& v, const CoregState& state,
                        const SpatialCorrSet& corr, int size_guard) {
  check_dims(v, state, corr);
  const int n = corr.n();
  const int p = state.dim();
  const Matrix cov = dense_covariance(state, corr, size_guard);

  // vec(V): columns stacked, i.e. location-major ordering.
  Vector vec(n * p);
  for (int i = 0; i < n; ++i) vec.segment(i * p, p) = v.col(i);

  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("naive logpdf: densified covariance not PD");
  double log_det = 0.0;
  const Matrix lower = llt.matrixL();
  for (int i = 0; i < n * p; ++i) log_det += 2.0 * std::log(lower(i, i));
  const Vector x = lower.triangularView<Eigen::Lower>().solve(vec);
  return -0.5 * x.squaredNorm() - 0.5 * n * p * kLog2Pi - 0.5 * log_det;
}

Matrix kron_sum_inverse(const CoregState& state, const SpatialCorrSet& corr,
                        int size_guard) {
  const int n = corr.n();
  const int p = state.dim();
  check_guard(n, p, size_guard);
  Matrix prec = Matrix::Zero(n * p, n * p);
  for (int j = 0; j < p; ++j) {
    const Matrix outer =
        state.inverse().row(j).transpose() * state.inverse().row(j);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        prec.block(i * p, k * p, p, p) += corr.r_inv(j)(i, k) * outer;
  }
  return prec;
}

double kron_sum_logdet(const CoregState& state, const SpatialCorrSet& corr) {
  return 2.0 * corr.n() * state.log_abs_det() + corr.log_det_sum();
}

namespace {

double observation_loglik(const ObservedData& y, const LatentField& v,
                          const NoiseParams& tau) {
  double loglik = 0.0;
  for (int j = 0; j < y.p(); ++j) {
    const double log_norm = -0.5 * (kLog2Pi + std::log(tau[j]));
    const double inv_tau = 1.0 / tau[j];
    for (int i = 0; i < y.n(); ++i) {
      if (!y.observed(j, i)) continue;
      const double resid = v(j, i) - y.y(j, i);
      loglik += log_norm - 0.5 * resid * resid * inv_tau;
    }
  }
  return loglik;
}

}  // namespace

double complete_loglik_centered(const ObservedData& y, const LatentField& v,
                                const CoregState& state,
                                const SpatialCorrSet& corr,
                                const NoiseParams& tau, const MeanParams& mu) {
  if (y.p() != v.rows() || y.n() != v.cols())
    throw std::invalid_argument("complete loglik: Y and V shapes differ");
  if (tau.size() != v.rows() || mu.size() != v.rows())
    throw std::invalid_argument("complete loglik: tau/mu length != p");
  const LatentField centered = v.colwise() - mu;
  return lmc_logpdf_matrix(centered, state, corr) +
         observation_loglik(y, v, tau);
}

double complete_loglik_whitened(const ObservedData& y, const LatentField& w,
                                const CoregState& state,
                                const SpatialCorrSet& corr,
                                const NoiseParams& tau, const MeanParams& mu) {
  if (y.p() != w.rows() || y.n() != w.cols())
    throw std::invalid_argument("complete loglik: Y and W shapes differ");
  if (tau.size() != w.rows() || mu.size() != w.rows())
    throw std::invalid_argument("complete loglik: tau/mu length != p");
  const int n = corr.n();
  const int p = state.dim();

  double quad = 0.0;
  for (int j = 0; j < p; ++j) {
    const Vector x = corr.chol_lower(j)
                         .triangularView<Eigen::Lower>()
                         .solve(w.row(j).transpose());
    quad += x.squaredNorm();
  }
  const LatentField fit = (state.coreg() * w).colwise() + mu;
  return -0.5 * quad - 0.5 * n * p * kLog2Pi - 0.5 * corr.log_det_sum() +
         observation_loglik(y, fit, tau);
}

std::vector<Matrix> lmc_gram(const LatentField& v, const MeanParams& mu,
                             const SpatialCorrSet& corr) {
  if (v.cols() != corr.n() || mu.size() != v.rows())
    throw std::invalid_argument("gram: shape mismatch");
  const LatentField centered = v.colwise() - mu;
  std::vector<Matrix> gram;
  gram.reserve(corr.p());
  for (int j = 0; j < corr.p(); ++j)
    gram.push_back(centered * corr.r_inv(j) * centered.transpose());
  return gram;
}

double coreg_log_target(const Matrix& effective,
                        const std::vector<Matrix>& gram, int n) {
  const int p = static_cast<int>(effective.rows());
  Eigen::PartialPivLU<Matrix> lu(effective);
  double log_det = 0.0;
  for (int k = 0; k < p; ++k) {
    const double pivot = std::abs(lu.matrixLU()(k, k));
    if (pivot == 0.0 || !std::isfinite(pivot))
      return -std::numeric_limits<double>::infinity();
    log_det += std::log(pivot);
  }
  const Matrix inv = lu.inverse();
  if (!inv.allFinite()) return -std::numeric_limits<double>::infinity();
  double quad = 0.0;
  for (int j = 0; j < p; ++j)
    quad += (inv.row(j) * gram[static_cast<size_t>(j)] * inv.row(j).transpose())
                .value();
  return -0.5 * quad - n * log_det;
}

}  // namespace lmc
