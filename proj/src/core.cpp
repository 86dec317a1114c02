#include "lmc/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lmc {

double correlation(CorrelationFamily family, double phi, double distance) {
  switch (family) {
    case CorrelationFamily::kExponential:
      return std::exp(-phi * distance);
  }
  throw std::logic_error("unknown correlation family");
}

Locations::Locations(Matrix points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() != 2)
    throw std::invalid_argument("locations: need an n x 2 matrix with n >= 1");
  if (!points_.allFinite())
    throw std::invalid_argument("locations: non-finite coordinate");
  const int n = size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((points_.row(i).array() == points_.row(j).array()).all()) {
        std::ostringstream msg;
        msg << "locations: rows " << i << " and " << j
            << " coincide; correlation matrices would be singular";
        throw std::invalid_argument(msg.str());
      }
}

ObservedData::ObservedData(Matrix y_in, ByteMatrix avail_in)
    : y(std::move(y_in)), avail(std::move(avail_in)) {
  if (y.rows() != avail.rows() || y.cols() != avail.cols())
    throw std::invalid_argument("observed data: y and avail shapes differ");
}

ObservedData ObservedData::fully_observed(Matrix y_in) {
  ByteMatrix all = ByteMatrix::Constant(y_in.rows(), y_in.cols(), 1);
  return ObservedData(std::move(y_in), std::move(all));
}

int ObservedData::n_avail(int row) const {
  int count = 0;
  for (int i = 0; i < n(); ++i) count += avail(row, i) != 0;
  return count;
}

void PriorSpec::validate() const {
  if (a_sd <= 0.0) throw std::invalid_argument("prior: a_sd must be positive");
  if (phi_min <= 0.0 || phi_max <= phi_min)
    throw std::invalid_argument("prior: need 0 < phi_min < phi_max");
  if (tau_shape <= 0.0 || tau_scale <= 0.0)
    throw std::invalid_argument("prior: tau shape/scale must be positive");
  if (mu_var <= 0.0) throw std::invalid_argument("prior: mu_var must be positive");
  if (pi_sparsity > 1.0)
    throw std::invalid_argument("prior: pi_sparsity must lie in [0, 1]");
}

void validate_ranges(const RangeParams& phi, const PriorSpec& prior) {
  for (int j = 0; j < phi.size(); ++j)
    if (!(phi[j] >= prior.phi_min && phi[j] <= prior.phi_max)) {
      std::ostringstream msg;
      msg << "range parameter " << j << " = " << phi[j]
          << " outside prior support [" << prior.phi_min << ", "
          << prior.phi_max << "]";
      throw std::invalid_argument(msg.str());
    }
}

void validate_noise(const NoiseParams& tau) {
  for (int j = 0; j < tau.size(); ++j)
    if (!(tau[j] > 0.0))
      throw std::invalid_argument("noise variances must be positive");
}

CoregState::CoregState(Matrix a, IntMatrix mask)
    : a_(std::move(a)), mask_(std::move(mask)) {
  if (a_.rows() != a_.cols() || a_.rows() < 1)
    throw std::invalid_argument("coregionalization matrix must be square");
  if (mask_.rows() != a_.rows() || mask_.cols() != a_.cols())
    throw std::invalid_argument("mask shape differs from matrix shape");
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) {
      if (mask_(i, j) != 0 && mask_(i, j) != 1)
        throw std::invalid_argument("mask entries must be 0 or 1");
      if (mask_(i, j) == 0) a_(i, j) = 0.0;
    }
  refresh();
}

CoregState CoregState::dense(Matrix a) {
  IntMatrix ones = IntMatrix::Constant(a.rows(), a.cols(), 1);
  return CoregState(std::move(a), std::move(ones));
}

std::optional<CoregState> CoregState::try_make(Matrix a, IntMatrix mask) {
  try {
    return CoregState(std::move(a), std::move(mask));
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

void CoregState::set_entry(int i, int j, double value) {
  if (mask_(i, j) != 1)
    throw std::invalid_argument("set_entry: cell is structurally zero");
  a_(i, j) = value;
  refresh();
}

void CoregState::set_mask_entry(int i, int j, bool present, double value) {
  mask_(i, j) = present ? 1 : 0;
  a_(i, j) = present ? value : 0.0;
  refresh();
}

void CoregState::set_coreg(const Matrix& a) {
  if (a.rows() != dim() || a.cols() != dim())
    throw std::invalid_argument("set_coreg: shape mismatch");
  a_ = a;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      if (mask_(i, j) == 0) a_(i, j) = 0.0;
  refresh();
}

void CoregState::refresh() {
  Eigen::PartialPivLU<Matrix> lu(a_);
  double log_det = 0.0;
  for (int k = 0; k < dim(); ++k) {
    const double pivot = std::abs(lu.matrixLU()(k, k));
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw std::runtime_error("coregionalization matrix is singular");
    log_det += std::log(pivot);
  }
  inv_ = lu.inverse();
  if (!inv_.allFinite())
    throw std::runtime_error("coregionalization matrix is numerically singular");
  log_abs_det_ = log_det;
}

Matrix marginal_covariance(const CoregState& state) {
  return state.coreg() * state.coreg().transpose();
}

Matrix cross_covariance(const CoregState& state, const RangeParams& phi,
                        CorrelationFamily family, double distance) {
  if (phi.size() != state.dim())
    throw std::invalid_argument("cross_covariance: phi length != p");
  if (distance < 0.0)
    throw std::invalid_argument("cross_covariance: negative distance");
  Vector rho(phi.size());
  for (int j = 0; j < phi.size(); ++j)
    rho[j] = correlation(family, phi[j], distance);
  return state.coreg() * rho.asDiagonal() * state.coreg().transpose();
}

std::pair<CoregState, RangeParams> canonicalize(const CoregState& state,
                                                const RangeParams& phi) {
  const int p = state.dim();
  if (phi.size() != p)
    throw std::invalid_argument("canonicalize: phi length != p");

  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return phi[a] < phi[b]; });

  Matrix a(p, p);
  IntMatrix m(p, p);
  RangeParams phi_out(p);
  for (int j = 0; j < p; ++j) {
    a.col(j) = state.coreg().col(order[j]);
    m.col(j) = state.mask().col(order[j]);
    phi_out[j] = phi[order[j]];
  }
  for (int j = 0; j < p; ++j) {
    Eigen::Index arg = 0;
    a.col(j).cwiseAbs().maxCoeff(&arg);
    if (a(arg, j) < 0.0) a.col(j) = -a.col(j);
  }
  return {CoregState(std::move(a), std::move(m)), std::move(phi_out)};
}

}  // namespace lmc
