#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmc/core.hpp"

namespace lmc {

struct BenchRow {
  int n = 0;
  int p = 0;
  std::string method;  // "matrix" or "naive"
  double seconds = 0.0;
  int evals = 0;
};

struct BenchOptions {
  std::vector<int> n_list{50, 100, 200};
  std::vector<int> p_list{2, 4, 8, 16};
  int evals = 500;        // per repeat, matrix form
  int naive_evals = 10;   // per repeat, naive form (it is much slower)
  int repeats = 5;        // the reported time is the median repeat
  int guard = 4000;       // naive method skipped when n*p exceeds this
};

// Times repeated log-density evaluations of both implementations on a fixed
// simulated instance per (n, p), with correlation factorizations built once
// outside the timed region. The two methods must agree to 1e-8 relative
// before any timing row is emitted for the pair; disagreements and guard
// skips are reported through `log`.
std::vector<BenchRow> run_likelihood_bench(const BenchOptions& opt,
                                           std::uint64_t seed,
                                           std::vector<std::string>* log);

}  // namespace lmc
