#pragma once

#include <optional>

#include "lmc/core.hpp"
#include "lmc/rng.hpp"

namespace lmc {

// True iff the effective matrix A o M is nonsingular with probability 1
// under any continuous law on the free entries. Recursive Laplace expansion:
// a mask with an all-zero row or column is inadmissible; one with fewer than
// p zeros overall is admissible; otherwise expand along the line with the
// most zeros and recurse into the minors of its nonzero cells. Results are
// memoized (thread-safe) since masks recur heavily during a run.
bool is_admissible(const IntMatrix& mask);

// Log of the mask prior pi^{sum m} (1-pi)^{p^2 - sum m}, up to the
// normalizing constant over admissible masks (only ratios ever enter MCMC).
double mask_log_prior(const IntMatrix& mask, double pi);

// True iff processes i and j are exactly uncorrelated at every distance,
// i.e. rows i and j of the mask have disjoint support.
bool independence_indicator(const IntMatrix& mask, int i, int j);

// One elementary reversible-jump move: a cell is picked uniformly among all
// p^2; an occupied cell proposes death (entry discarded), an empty cell
// proposes birth with the new value drawn from its N(0, a_sd^2) prior. With
// the prior as proposal the acceptance adjustment reduces to the mask-prior
// ratio, carried in log_prior_adjust. Deaths that would leave an
// inadmissible mask come back with no state and auto_reject set.
struct RjProposal {
  std::optional<CoregState> state;
  double log_prior_adjust = 0.0;
  int row = 0;
  int col = 0;
  bool birth = false;
  bool auto_reject = false;
};

RjProposal propose_rj(const CoregState& state, double pi, double a_sd,
                      Rng& rng);

}  // namespace lmc
