#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "lmc/core.hpp"
#include "lmc/mcmc.hpp"
#include "lmc/simulate.hpp"

namespace lmc {

// 17 significant digits: doubles round-trip exactly through text.
std::string format_double(double x);

struct Dataset {
  Locations locs;
  ObservedData data;
};

// Data CSV: header `x,y,v1,...,vp`, one row per location, empty cell =
// missing (placeholder 0, avail 0). Parse errors carry line and column.
Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const Locations& locs,
                  const ObservedData& data);

// Chain CSV: header a_11..a_pp, m_11..m_pp, phi_1..phi_p, tau_1..tau_p,
// mu_1..mu_p, loglik; one row per retained iteration.
std::string chain_header(int p);
void save_chain(const std::string& path,
                const std::vector<ChainRecord>& records, int p);
std::vector<ChainRecord> load_chain(const std::string& path);

// Incremental writer used by long fits: rows are flushed in batches so an
// interrupted run leaves a usable (truncated) chain behind.
class ChainWriter {
 public:
  ChainWriter(const std::string& path, int p, int flush_every = 100);
  void append(const ChainRecord& rec);

 private:
  std::ofstream out_;
  int p_;
  int flush_every_;
  int since_flush_ = 0;
};

// Latent-field CSV companion to the chain (one row per retained iteration,
// p*n values, column-major by location); predictions condition on these.
void save_latents(const std::string& path,
                  const std::vector<LatentField>& latents, int p, int n);
std::vector<LatentField> load_latents(const std::string& path, int p, int n);

// Flat `key = value` configuration with dotted keys; '#' starts a comment.
// Unknown keys are rejected with a named error.
struct RunConfig {
  std::uint64_t seed = 1;
  PriorSpec prior;
  SamplerConfig mcmc;
  CorrelationFamily family = CorrelationFamily::kExponential;

  ScenarioKind sim_kind = ScenarioKind::kFull;
  int sim_p = 2;
  int sim_n = 100;
  std::vector<double> sim_miss_frac;  // per component; single value = all

  int grid_nx = 10;
  int grid_ny = 10;
  std::string predict_points_file;  // overrides the grid when set

  std::vector<double> summary_distances{0.0, 0.1};

  std::vector<int> bench_n{50, 100, 200};
  std::vector<int> bench_p{2, 4, 8, 16};
  int bench_evals = 500;
  int bench_naive_evals = 10;
  int bench_repeats = 5;
  int bench_guard = 4000;

  void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Textual mask like "110;011;111" (rows separated by ';').
IntMatrix parse_mask_text(const std::string& text);
std::string mask_to_text(const IntMatrix& mask);

void write_key_values(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& kv);
std::vector<std::pair<std::string, std::string>> summary_key_values(
    const ChainSummaries& s);

}  // namespace lmc
