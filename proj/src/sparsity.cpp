#include "lmc/sparsity.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace lmc {

namespace {

std::string mask_key(const IntMatrix& mask) {
  std::string key;
  key.reserve(static_cast<size_t>(mask.size()));
  for (int i = 0; i < mask.rows(); ++i)
    for (int j = 0; j < mask.cols(); ++j)
      key.push_back(mask(i, j) ? '1' : '0');
  return key;
}

std::mutex memo_mutex;
std::unordered_map<std::string, bool> memo;

bool admissible_recursive(const IntMatrix& mask) {
  const int p = static_cast<int>(mask.rows());
  if (p == 0) return true;

  int zeros = 0;
  for (int i = 0; i < p; ++i) {
    int row_ones = 0, col_ones = 0;
    for (int j = 0; j < p; ++j) {
      row_ones += mask(i, j);
      col_ones += mask(j, i);
      zeros += mask(i, j) == 0;
    }
    if (row_ones == 0 || col_ones == 0) return false;
  }
  if (zeros < p) return true;

  // Expand along the row or column with the most zeros to minimize the
  // number of recursive calls.
  int best_line = 0;
  bool best_is_row = true;
  int best_zeros = -1;
  for (int i = 0; i < p; ++i) {
    int row_zeros = 0, col_zeros = 0;
    for (int j = 0; j < p; ++j) {
      row_zeros += mask(i, j) == 0;
      col_zeros += mask(j, i) == 0;
    }
    if (row_zeros > best_zeros) {
      best_zeros = row_zeros;
      best_line = i;
      best_is_row = true;
    }
    if (col_zeros > best_zeros) {
      best_zeros = col_zeros;
      best_line = i;
      best_is_row = false;
    }
  }

  for (int k = 0; k < p; ++k) {
    const int entry = best_is_row ? mask(best_line, k) : mask(k, best_line);
    if (entry == 0) continue;
    const int drop_row = best_is_row ? best_line : k;
    const int drop_col = best_is_row ? k : best_line;
    IntMatrix minor(p - 1, p - 1);
    for (int i = 0, mi = 0; i < p; ++i) {
      if (i == drop_row) continue;
      for (int j = 0, mj = 0; j < p; ++j) {
        if (j == drop_col) continue;
        minor(mi, mj) = mask(i, j);
        ++mj;
      }
      ++mi;
    }
    if (is_admissible(minor)) return true;
  }
  return false;
}

}  // namespace

bool is_admissible(const IntMatrix& mask) {
  if (mask.rows() != mask.cols() || mask.rows() < 1)
    throw std::invalid_argument("is_admissible: mask must be square, p >= 1");
  for (int i = 0; i < mask.rows(); ++i)
    for (int j = 0; j < mask.cols(); ++j)
      if (mask(i, j) != 0 && mask(i, j) != 1)
        throw std::invalid_argument("is_admissible: entries must be 0 or 1");

  const std::string key = mask_key(mask);
  {
    std::lock_guard<std::mutex> lock(memo_mutex);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
  }
  const bool result = admissible_recursive(mask);
  {
    std::lock_guard<std::mutex> lock(memo_mutex);
    memo.emplace(key, result);
  }
  return result;
}

double mask_log_prior(const IntMatrix& mask, double pi) {
  if (pi < 0.0 || pi > 1.0)
    throw std::invalid_argument("mask_log_prior: pi outside [0, 1]");
  const double ones = mask.sum();
  const double zeros = static_cast<double>(mask.size()) - ones;
  return ones * std::log(pi) + zeros * std::log1p(-pi);
}

bool independence_indicator(const IntMatrix& mask, int i, int j) {
  if (i == j)
    throw std::invalid_argument("independence_indicator: i == j");
  for (int k = 0; k < mask.cols(); ++k)
    if (mask(i, k) != 0 && mask(j, k) != 0) return false;
  return true;
}

RjProposal propose_rj(const CoregState& state, double pi, double a_sd,
                      Rng& rng) {
  const int p = state.dim();
  const auto cell = rng.uniform_int(static_cast<std::uint64_t>(p) * p);
  RjProposal out;
  out.row = static_cast<int>(cell / p);
  out.col = static_cast<int>(cell % p);

  const double log_odds = std::log(pi) - std::log1p(-pi);
  if (state.mask()(out.row, out.col) == 1) {
    // Death: prior gains a zero.
    out.birth = false;
    out.log_prior_adjust = -log_odds;
    IntMatrix mask = state.mask();
    mask(out.row, out.col) = 0;
    if (!is_admissible(mask)) {
      out.auto_reject = true;
      return out;
    }
    Matrix a = state.coreg();
    a(out.row, out.col) = 0.0;
    out.state = CoregState::try_make(std::move(a), std::move(mask));
    if (!out.state) out.auto_reject = true;
  } else {
    // Birth: the new entry is drawn from its prior, which cancels the
    // proposal density in the acceptance ratio.
    out.birth = true;
    out.log_prior_adjust = log_odds;
    IntMatrix mask = state.mask();
    mask(out.row, out.col) = 1;
    Matrix a = state.coreg();
    a(out.row, out.col) = rng.normal(0.0, a_sd);
    out.state = CoregState::try_make(std::move(a), std::move(mask));
    if (!out.state) out.auto_reject = true;
  }
  return out;
}

}  // namespace lmc
