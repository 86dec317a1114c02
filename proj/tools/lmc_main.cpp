#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lmc/bench.hpp"
#include "lmc/io.hpp"
#include "lmc/mcmc.hpp"
#include "lmc/predict.hpp"
#include "lmc/simulate.hpp"
#include "lmc/sparsity.hpp"

namespace fs = std::filesystem;

namespace {

lmc::RunConfig resolve_config(const std::string& config_path,
                              std::optional<std::uint64_t> seed) {
  lmc::RunConfig cfg;
  if (!config_path.empty()) cfg = lmc::load_config(config_path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

lmc::Locations grid_locations(int nx, int ny) {
  lmc::Matrix pts(nx * ny, 2);
  int r = 0;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      pts(r, 0) = nx > 1 ? static_cast<double>(ix) / (nx - 1) : 0.5;
      pts(r, 1) = ny > 1 ? static_cast<double>(iy) / (ny - 1) : 0.5;
      ++r;
    }
  return lmc::Locations(std::move(pts));
}

int cmd_simulate(const lmc::RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  lmc::Rng master(cfg.seed);
  lmc::Rng scen_rng = master.stream(0);
  lmc::StudyScenario scen =
      lmc::make_study_scenario(cfg.sim_kind, cfg.sim_p, cfg.sim_n, scen_rng);
  const int p = cfg.sim_p;
  const int n = cfg.sim_n;

  // The latent field is drawn jointly over the observation sites and the
  // held-out grid so the grid truth is an exact realization, not a re-draw.
  const lmc::Locations grid = grid_locations(cfg.grid_nx, cfg.grid_ny);
  lmc::Matrix all_pts(n + grid.size(), 2);
  all_pts.topRows(n) = scen.locs.points();
  all_pts.bottomRows(grid.size()) = grid.points();
  const lmc::Locations all(std::move(all_pts));
  const lmc::SpatialCorrSet corr(all, scen.phi, cfg.family, cfg.mcmc.jitter);
  lmc::Rng field_rng = master.stream(1);
  const lmc::LatentField v_all = lmc::sample_lmc(scen.state, corr, field_rng);
  const lmc::LatentField v_obs = v_all.leftCols(n);
  const lmc::LatentField v_grid = v_all.rightCols(grid.size());

  lmc::ByteMatrix avail = lmc::ByteMatrix::Constant(p, n, 1);
  if (!cfg.sim_miss_frac.empty()) {
    lmc::Rng miss_rng = master.stream(2);
    for (int j = 0; j < p; ++j) {
      const double frac = cfg.sim_miss_frac.size() == 1
                              ? cfg.sim_miss_frac[0]
                              : cfg.sim_miss_frac[j % cfg.sim_miss_frac.size()];
      for (int i = 0; i < n; ++i)
        if (miss_rng.uniform() < frac) avail(j, i) = 0;
    }
  }

  lmc::Rng noise_rng = master.stream(3);
  const lmc::ObservedData data = lmc::sample_observed(
      v_obs, scen.tau, lmc::MeanParams::Zero(p), avail, noise_rng);

  lmc::save_dataset(out_dir + "/data.csv", scen.locs, data);
  lmc::save_dataset(out_dir + "/grid_truth.csv", grid,
                    lmc::ObservedData::fully_observed(v_grid));

  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("sim.kind",
                  cfg.sim_kind == lmc::ScenarioKind::kFull ? "full" : "diagonal");
  kv.emplace_back("sim.p", std::to_string(p));
  kv.emplace_back("sim.n", std::to_string(n));
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      kv.emplace_back("a_" + std::to_string(i + 1) + "_" + std::to_string(j + 1),
                      lmc::format_double(scen.state.coreg()(i, j)));
  for (int j = 0; j < p; ++j)
    kv.emplace_back("phi_" + std::to_string(j + 1),
                    lmc::format_double(scen.phi[j]));
  for (int j = 0; j < p; ++j)
    kv.emplace_back("tau_" + std::to_string(j + 1),
                    lmc::format_double(scen.tau[j]));
  lmc::write_key_values(out_dir + "/params.txt", kv);
  std::cout << "wrote " << out_dir << "/data.csv, grid_truth.csv, params.txt\n";
  return 0;
}

int cmd_fit(const lmc::RunConfig& cfg, const std::string& data_path,
            const std::string& out_dir) {
  fs::create_directories(out_dir);
  const lmc::Dataset ds = lmc::load_dataset(data_path);
  const int p = ds.data.p();

  lmc::SamplerConfig mcfg = cfg.mcmc;
  mcfg.seed = cfg.seed;
  lmc::ChainWriter writer(out_dir + "/chain.csv", p);
  const lmc::McmcResult result = lmc::run_chain(
      ds.data, ds.locs, cfg.prior, mcfg, {},
      [&](const lmc::ChainRecord& rec) { writer.append(rec); });

  lmc::save_latents(out_dir + "/latents.csv", result.latents, p, ds.data.n());

  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("records", std::to_string(result.records.size()));
  kv.emplace_back("phi_accept_rate", lmc::format_double(result.phi_accept_rate));
  kv.emplace_back("rj_accept_rate", lmc::format_double(result.rj_accept_rate));
  if (!result.records.empty()) {
    const lmc::ChainSummaries s = lmc::chain_summaries(
        result.records, cfg.summary_distances, cfg.family);
    for (auto& item : lmc::summary_key_values(s)) kv.push_back(std::move(item));
  }
  lmc::write_key_values(out_dir + "/summary.txt", kv);
  std::cout << "wrote " << out_dir << "/chain.csv, latents.csv, summary.txt\n";
  return 0;
}

int cmd_predict(const lmc::RunConfig& cfg, const std::string& data_path,
                const std::string& fit_dir, const std::string& truth_path,
                const std::string& out_dir) {
  fs::create_directories(out_dir);
  const lmc::Dataset ds = lmc::load_dataset(data_path);
  const auto chain = lmc::load_chain(fit_dir + "/chain.csv");
  if (chain.empty())
    throw std::invalid_argument("predict: chain file has no records");
  const int p = static_cast<int>(chain.front().a.rows());
  if (p != ds.data.p())
    throw std::invalid_argument("predict: chain and data dimensions differ");
  const auto latents =
      lmc::load_latents(fit_dir + "/latents.csv", p, ds.data.n());
  if (latents.size() != chain.size())
    throw std::invalid_argument("predict: chain/latent record counts differ");

  std::optional<lmc::Dataset> truth;
  lmc::Locations pred_locs = grid_locations(cfg.grid_nx, cfg.grid_ny);
  if (!truth_path.empty()) {
    truth = lmc::load_dataset(truth_path);
    pred_locs = truth->locs;
  } else if (!cfg.predict_points_file.empty()) {
    pred_locs = lmc::load_dataset(cfg.predict_points_file).locs;
  }

  const lmc::PredictionSummary summary = lmc::posterior_predict(
      chain, latents, ds.locs, pred_locs, cfg.family, cfg.mcmc.jitter);

  std::ofstream out(out_dir + "/predictions.csv");
  if (!out) throw std::runtime_error("cannot write predictions.csv");
  out << "x,y";
  for (int j = 1; j <= p; ++j)
    out << ",mean_v" << j << ",q05_v" << j << ",q95_v" << j;
  out << "\n";
  for (int i = 0; i < pred_locs.size(); ++i) {
    out << lmc::format_double(pred_locs.points()(i, 0)) << ","
        << lmc::format_double(pred_locs.points()(i, 1));
    for (int j = 0; j < p; ++j)
      out << "," << lmc::format_double(summary.mean(j, i)) << ","
          << lmc::format_double(summary.q05(j, i)) << ","
          << lmc::format_double(summary.q95(j, i));
    out << "\n";
  }
  out.flush();

  if (truth) {
    const double rmse = lmc::posterior_predict_rmse(
        chain, latents, ds.locs, pred_locs, truth->data.y, cfg.family,
        cfg.mcmc.jitter);
    lmc::write_key_values(out_dir + "/rmse.txt",
                          {{"rmse", lmc::format_double(rmse)}});
    std::cout << "rmse = " << rmse << "\n";
  }
  std::cout << "wrote " << out_dir << "/predictions.csv\n";
  return 0;
}

int cmd_bench(const lmc::RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  lmc::BenchOptions opt;
  opt.n_list = cfg.bench_n;
  opt.p_list = cfg.bench_p;
  opt.evals = cfg.bench_evals;
  opt.naive_evals = cfg.bench_naive_evals;
  opt.repeats = cfg.bench_repeats;
  opt.guard = cfg.bench_guard;
  std::vector<std::string> log;
  const auto rows = lmc::run_likelihood_bench(opt, cfg.seed, &log);

  std::ofstream out(out_dir + "/bench.csv");
  if (!out) throw std::runtime_error("cannot write bench.csv");
  out << "n,p,method,seconds,evals\n";
  for (const auto& row : rows)
    out << row.n << "," << row.p << "," << row.method << ","
        << lmc::format_double(row.seconds) << "," << row.evals << "\n";

  std::ofstream logfile(out_dir + "/bench_log.txt");
  for (const auto& line : log) {
    logfile << line << "\n";
    std::cout << line << "\n";
  }
  std::cout << "wrote " << out_dir << "/bench.csv\n";
  return 0;
}

int cmd_mask_check(const std::string& mask_text) {
  const lmc::IntMatrix mask = lmc::parse_mask_text(mask_text);
  if (lmc::is_admissible(mask)) {
    std::cout << "admissible\n";
    return 0;
  }
  std::cout << "inadmissible\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear model of coregionalization: simulation, exact "
               "likelihood evaluation, MCMC inference and kriging"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", data_path, fit_dir, truth_path;
  std::string mode_flag, mask_text;
  std::optional<std::uint64_t> seed;

  auto* sim = app.add_subcommand("simulate", "generate a study scenario");
  sim->add_option("--config", config_path, "config file");
  sim->add_option("--seed", seed, "master seed (overrides config)");
  sim->add_option("--out", out_dir, "output directory");

  auto* fit = app.add_subcommand("fit", "run an MCMC fit");
  fit->add_option("--data", data_path, "data CSV")->required();
  fit->add_option("--config", config_path, "config file");
  fit->add_option("--seed", seed, "master seed (overrides config)");
  fit->add_option("--out", out_dir, "output directory");
  fit->add_option("--mode", mode_flag,
                  "standard|sparse|interweave[_centered|_whitened|_both]");

  auto* pred = app.add_subcommand("predict", "posterior kriging summaries");
  pred->add_option("--data", data_path, "data CSV")->required();
  pred->add_option("--fit", fit_dir, "fit output directory")->required();
  pred->add_option("--truth", truth_path, "held-out truth CSV (enables RMSE)");
  pred->add_option("--config", config_path, "config file");
  pred->add_option("--seed", seed, "master seed (overrides config)");
  pred->add_option("--out", out_dir, "output directory");

  auto* bench = app.add_subcommand("bench", "likelihood scaling benchmark");
  bench->add_option("--config", config_path, "config file");
  bench->add_option("--seed", seed, "master seed (overrides config)");
  bench->add_option("--out", out_dir, "output directory");

  auto* mask = app.add_subcommand("mask-check", "test mask admissibility");
  mask->add_option("mask", mask_text, "rows of 0/1 separated by ';'")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(resolve_config(config_path, seed), out_dir);
    if (fit->parsed()) {
      lmc::RunConfig cfg = resolve_config(config_path, seed);
      if (!mode_flag.empty()) {
        lmc::RunConfig tmp = lmc::parse_config_text("mcmc.mode = " + mode_flag);
        cfg.mcmc.mode = tmp.mcmc.mode;
      }
      return cmd_fit(cfg, data_path, out_dir);
    }
    if (pred->parsed())
      return cmd_predict(resolve_config(config_path, seed), data_path, fit_dir,
                         truth_path, out_dir);
    if (bench->parsed()) return cmd_bench(resolve_config(config_path, seed), out_dir);
    if (mask->parsed()) return cmd_mask_check(mask_text);
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
