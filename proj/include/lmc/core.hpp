#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>

namespace lmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;
using ByteMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Latent field values: one process per row, one location per column.
using LatentField = Matrix;

// Per-process range parameters (phi_j > 0), observational variances
// (tau_j > 0) and constant means.
using RangeParams = Vector;
using NoiseParams = Vector;
using MeanParams = Vector;

enum class CorrelationFamily { kExponential };

// Isotropic correlation at the given distance; rho(phi, 0) = 1.
double correlation(CorrelationFamily family, double phi, double distance);

// A fixed set of n pairwise-distinct planar locations.
class Locations {
 public:
  explicit Locations(Matrix points);  // n x 2

  int size() const { return static_cast<int>(points_.rows()); }
  const Matrix& points() const { return points_; }
  double distance(int i, int j) const {
    return (points_.row(i) - points_.row(j)).norm();
  }

 private:
  Matrix points_;
};

// p x n observations with a per-cell availability mask (1 = observed).
// Cells with avail == 0 hold an arbitrary placeholder value that must never
// influence any computation.
struct ObservedData {
  Matrix y;
  ByteMatrix avail;

  ObservedData() = default;
  ObservedData(Matrix y_in, ByteMatrix avail_in);
  static ObservedData fully_observed(Matrix y_in);

  int p() const { return static_cast<int>(y.rows()); }
  int n() const { return static_cast<int>(y.cols()); }
  bool observed(int j, int i) const { return avail(j, i) != 0; }
  int n_avail(int row) const;
};

// Hyperparameters shared by every sampler, defaults matching the shipped
// experiments. pi_sparsity <= 0 means "use 1/p".
struct PriorSpec {
  double a_sd = 1.0;
  double phi_min = 3.0;
  double phi_max = 30.0;
  double tau_shape = 1.0;
  double tau_scale = 1.0;
  double mu_var = 10.0;
  double pi_sparsity = -1.0;

  double pi(int p) const { return pi_sparsity > 0.0 ? pi_sparsity : 1.0 / p; }
  void validate() const;  // throws std::invalid_argument
};

void validate_ranges(const RangeParams& phi, const PriorSpec& prior);
void validate_noise(const NoiseParams& tau);

// Coregionalization matrix with structural-zero mask. Masked entries of the
// stored matrix are pinned at zero, so coreg() is already the effective
// (Hadamard-masked) matrix. The inverse rows and log|det| are cached and
// refreshed eagerly on every mutation; construction throws if the effective
// matrix is singular.
class CoregState {
 public:
  CoregState(Matrix a, IntMatrix mask);
  static CoregState dense(Matrix a);  // all-ones mask
  static std::optional<CoregState> try_make(Matrix a, IntMatrix mask);

  int dim() const { return static_cast<int>(a_.rows()); }
  const Matrix& coreg() const { return a_; }
  const IntMatrix& mask() const { return mask_; }
  // Rows of inverse() are the vectors multiplying V in the matrix-form
  // density (row j is the j-th row of the inverted effective matrix).
  const Matrix& inverse() const { return inv_; }
  double log_abs_det() const { return log_abs_det_; }
  int nonzero_count() const { return mask_.sum(); }

  void set_entry(int i, int j, double value);       // requires mask(i,j) == 1
  void set_mask_entry(int i, int j, bool present, double value = 0.0);
  void set_coreg(const Matrix& a);                  // keeps the current mask

 private:
  void refresh();  // throws std::runtime_error on a singular matrix

  Matrix a_;
  IntMatrix mask_;
  Matrix inv_;
  double log_abs_det_ = 0.0;
};

// Marginal covariance at a single location: (A o M)(A o M)^T.
Matrix marginal_covariance(const CoregState& state);

// Cross-covariance among components at the given distance,
// C(d)_{ik} = sum_j a_ij a_kj rho(phi_j, d); equals marginal_covariance at 0.
Matrix cross_covariance(const CoregState& state, const RangeParams& phi,
                        CorrelationFamily family, double distance);

// Reporting representative of the (sign, permutation) equivalence class:
// columns reordered so phi is ascending (stable on ties) and each column
// signed so its largest-magnitude entry is positive. The implied distribution
// is unchanged. Used only for summaries, never inside samplers.
std::pair<CoregState, RangeParams> canonicalize(const CoregState& state,
                                                const RangeParams& phi);

// One posterior draw in the flat persisted layout. `a` stores the effective
// (masked) matrix, so masked cells are zero.
struct ChainRecord {
  Matrix a;
  IntMatrix m;
  Vector phi;
  Vector tau;
  Vector mu;
  double loglik = 0.0;
};

}  // namespace lmc
