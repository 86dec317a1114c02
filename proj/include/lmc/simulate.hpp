#pragma once

#include "lmc/core.hpp"
#include "lmc/density.hpp"
#include "lmc/rng.hpp"

namespace lmc {

// Exact draw of a p x n LMC field: V = sum_j a_j z_j B_j^T with z_j standard
// normal row vectors and B_j the cached Cholesky factors. Row j consumes
// substream j of `rng` (stream splitting is the reproducibility contract:
// results do not depend on evaluation order).
LatentField sample_lmc(const CoregState& state, const SpatialCorrSet& corr,
                       Rng& rng);

// Observations y_ji = v_ji + mu_j + sqrt(tau_j) eps for available cells;
// unavailable cells hold placeholder 0. Row j consumes substream j.
ObservedData sample_observed(const LatentField& v, const NoiseParams& tau,
                             const MeanParams& mu, const ByteMatrix& avail,
                             Rng& rng);

enum class ScenarioKind { kFull, kDiagonal };

struct StudyScenario {
  Locations locs;
  CoregState state;
  RangeParams phi;
  NoiseParams tau;
};

// Ranges splitting [lo, hi] with equal gaps on the log scale; p = 1 uses the
// lower endpoint.
RangeParams log_spaced_ranges(int p, double lo = 5.0, double hi = 25.0);

// The simulation-study designs: n uniform locations on the unit square;
// full: coregionalization filled with 1/sqrt(p), entries strictly above the
// diagonal negative (unit marginal variances); diagonal: identity matrix.
// Ranges log-spaced on [5, 25]; observational variances 0.25.
StudyScenario make_study_scenario(ScenarioKind kind, int p, int n, Rng& rng);

}  // namespace lmc
