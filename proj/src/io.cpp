#include "lmc/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace lmc {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& text, int line, int col) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    std::ostringstream msg;
    msg << "parse error at line " << line << ", column " << col
        << ": not a number: '" << text << "'";
    throw std::invalid_argument(msg.str());
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::invalid_argument("empty dataset file: " + path);
  const auto header = split(lines[0], ',');
  if (header.size() < 3 || trim(header[0]) != "x" || trim(header[1]) != "y")
    throw std::invalid_argument(
        "dataset header must be x,y,v1,... with at least one component");
  const int p = static_cast<int>(header.size()) - 2;

  std::vector<std::array<double, 2>> coords;
  std::vector<std::vector<double>> values(p);
  std::vector<std::vector<std::uint8_t>> present(p);
  for (size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto cells = split(lines[li], ',');
    if (static_cast<int>(cells.size()) != p + 2) {
      std::ostringstream msg;
      msg << "parse error at line " << li + 1 << ": expected " << p + 2
          << " columns, found " << cells.size();
      throw std::invalid_argument(msg.str());
    }
    const int line_no = static_cast<int>(li) + 1;
    coords.push_back({parse_double(cells[0], line_no, 1),
                      parse_double(cells[1], line_no, 2)});
    for (int j = 0; j < p; ++j) {
      if (trim(cells[j + 2]).empty()) {
        values[j].push_back(0.0);
        present[j].push_back(0);
      } else {
        values[j].push_back(parse_double(cells[j + 2], line_no, j + 3));
        present[j].push_back(1);
      }
    }
  }
  const int n = static_cast<int>(coords.size());
  if (n < 1) throw std::invalid_argument("dataset has no data rows");

  Matrix points(n, 2);
  for (int i = 0; i < n; ++i) {
    points(i, 0) = coords[i][0];
    points(i, 1) = coords[i][1];
  }
  Matrix y(p, n);
  ByteMatrix avail(p, n);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) {
      y(j, i) = values[j][i];
      avail(j, i) = present[j][i];
    }
  return Dataset{Locations(std::move(points)),
                 ObservedData(std::move(y), std::move(avail))};
}

void save_dataset(const std::string& path, const Locations& locs,
                  const ObservedData& data) {
  if (locs.size() != data.n())
    throw std::invalid_argument("save_dataset: location count != columns");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "x,y";
  for (int j = 0; j < data.p(); ++j) out << ",v" << j + 1;
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    out << format_double(locs.points()(i, 0)) << ","
        << format_double(locs.points()(i, 1));
    for (int j = 0; j < data.p(); ++j) {
      out << ",";
      if (data.observed(j, i)) out << format_double(data.y(j, i));
    }
    out << "\n";
  }
}

std::string chain_header(int p) {
  std::ostringstream out;
  for (int i = 1; i <= p; ++i)
    for (int j = 1; j <= p; ++j) out << "a_" << i << j << ",";
  for (int i = 1; i <= p; ++i)
    for (int j = 1; j <= p; ++j) out << "m_" << i << j << ",";
  for (int j = 1; j <= p; ++j) out << "phi_" << j << ",";
  for (int j = 1; j <= p; ++j) out << "tau_" << j << ",";
  for (int j = 1; j <= p; ++j) out << "mu_" << j << ",";
  out << "loglik";
  return out.str();
}

namespace {

std::string chain_row(const ChainRecord& rec, int p) {
  std::ostringstream out;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) out << format_double(rec.a(i, j)) << ",";
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) out << rec.m(i, j) << ",";
  for (int j = 0; j < p; ++j) out << format_double(rec.phi[j]) << ",";
  for (int j = 0; j < p; ++j) out << format_double(rec.tau[j]) << ",";
  for (int j = 0; j < p; ++j) out << format_double(rec.mu[j]) << ",";
  out << format_double(rec.loglik);
  return out.str();
}

}  // namespace

void save_chain(const std::string& path, const std::vector<ChainRecord>& records,
                int p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << chain_header(p) << "\n";
  for (const auto& rec : records) out << chain_row(rec, p) << "\n";
}

std::vector<ChainRecord> load_chain(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::invalid_argument("empty chain file: " + path);
  const auto header = split(lines[0], ',');
  int psq = 0;
  for (const auto& h : header) psq += trim(h).rfind("a_", 0) == 0;
  const int p = static_cast<int>(std::lround(std::sqrt(psq)));
  if (p < 1 || p * p != psq)
    throw std::invalid_argument("chain header: cannot infer dimension");
  const size_t expected = static_cast<size_t>(2 * p * p + 3 * p + 1);
  if (header.size() != expected)
    throw std::invalid_argument("chain header: unexpected column count");

  std::vector<ChainRecord> records;
  for (size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto cells = split(lines[li], ',');
    if (cells.size() != expected) {
      std::ostringstream msg;
      msg << "chain parse error at line " << li + 1 << ": expected "
          << expected << " columns";
      throw std::invalid_argument(msg.str());
    }
    const int line_no = static_cast<int>(li) + 1;
    ChainRecord rec;
    rec.a = Matrix(p, p);
    rec.m = IntMatrix(p, p);
    rec.phi = Vector(p);
    rec.tau = Vector(p);
    rec.mu = Vector(p);
    int c = 0;
    const auto next = [&]() {
      const double v = parse_double(cells[c], line_no, c + 1);
      ++c;
      return v;
    };
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) rec.a(i, j) = next();
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) rec.m(i, j) = static_cast<int>(next());
    for (int j = 0; j < p; ++j) rec.phi[j] = next();
    for (int j = 0; j < p; ++j) rec.tau[j] = next();
    for (int j = 0; j < p; ++j) rec.mu[j] = next();
    rec.loglik = next();
    records.push_back(std::move(rec));
  }
  return records;
}

ChainWriter::ChainWriter(const std::string& path, int p, int flush_every)
    : out_(path), p_(p), flush_every_(flush_every) {
  if (!out_) throw std::runtime_error("cannot write file: " + path);
  out_ << chain_header(p) << "\n";
  out_.flush();
}

void ChainWriter::append(const ChainRecord& rec) {
  out_ << chain_row(rec, p_) << "\n";
  if (++since_flush_ >= flush_every_) {
    out_.flush();
    since_flush_ = 0;
  }
}

void save_latents(const std::string& path,
                  const std::vector<LatentField>& latents, int p, int n) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      out << (i + j > 0 ? "," : "") << "v_" << j + 1 << "_" << i + 1;
  out << "\n";
  for (const auto& v : latents) {
    bool first = true;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) {
        if (!first) out << ",";
        out << format_double(v(j, i));
        first = false;
      }
    out << "\n";
  }
}

std::vector<LatentField> load_latents(const std::string& path, int p, int n) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::invalid_argument("empty latent file: " + path);
  std::vector<LatentField> latents;
  for (size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto cells = split(lines[li], ',');
    if (static_cast<int>(cells.size()) != p * n)
      throw std::invalid_argument("latent file: wrong column count");
    LatentField v(p, n);
    int c = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) {
        v(j, i) = parse_double(cells[c], static_cast<int>(li) + 1, c + 1);
        ++c;
      }
    latents.push_back(std::move(v));
  }
  return latents;
}

// ------------------------------------------------------------------ config --

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
  const std::string v = trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + value);
}

std::vector<double> parse_double_list(const std::string& value) {
  std::vector<double> out;
  for (const auto& piece : split(value, ','))
    out.push_back(parse_double(piece, 0, 0));
  return out;
}

std::vector<int> parse_int_list(const std::string& value) {
  std::vector<int> out;
  for (double v : parse_double_list(value)) out.push_back(static_cast<int>(v));
  return out;
}

SamplerMode parse_mode(const std::string& value) {
  const std::string v = trim(value);
  if (v == "standard") return SamplerMode::kStandard;
  if (v == "sparse") return SamplerMode::kSparse;
  if (v == "interweave" || v == "interweave_both")
    return SamplerMode::kInterweaveBoth;
  if (v == "interweave_centered") return SamplerMode::kInterweaveCentered;
  if (v == "interweave_whitened") return SamplerMode::kInterweaveWhitened;
  throw std::invalid_argument("config: unknown sampler mode: " + value);
}

}  // namespace

void RunConfig::validate() const {
  prior.validate();
  mcmc.validate();
  if (sim_p < 1 || sim_n < 1)
    throw std::invalid_argument("config: sim.p and sim.n must be >= 1");
  for (double f : sim_miss_frac)
    if (f < 0.0 || f >= 1.0)
      throw std::invalid_argument("config: sim.miss_frac outside [0, 1)");
  if (grid_nx < 1 || grid_ny < 1)
    throw std::invalid_argument("config: prediction grid must be >= 1x1");
  if (bench_evals < 1 || bench_naive_evals < 1 || bench_repeats < 1 ||
      bench_guard < 1)
    throw std::invalid_argument("config: bench parameters must be >= 1");
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "config line " << line_no << ": expected key = value";
      throw std::invalid_argument(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto num = [&]() { return parse_double(value, line_no, 0); };

    if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num());
    else if (key == "model.jitter") cfg.mcmc.jitter = num();
    else if (key == "model.family") {
      if (trim(value) != "exponential")
        throw std::invalid_argument("config: unknown family: " + value);
      cfg.family = CorrelationFamily::kExponential;
    } else if (key == "prior.a_sd") cfg.prior.a_sd = num();
    else if (key == "prior.phi_min") cfg.prior.phi_min = num();
    else if (key == "prior.phi_max") cfg.prior.phi_max = num();
    else if (key == "prior.tau_shape") cfg.prior.tau_shape = num();
    else if (key == "prior.tau_scale") cfg.prior.tau_scale = num();
    else if (key == "prior.mu_var") cfg.prior.mu_var = num();
    else if (key == "prior.pi") cfg.prior.pi_sparsity = num();
    else if (key == "mcmc.iters") cfg.mcmc.iters = static_cast<int>(num());
    else if (key == "mcmc.burnin") cfg.mcmc.burnin = static_cast<int>(num());
    else if (key == "mcmc.mh_step") cfg.mcmc.mh_step = num();
    else if (key == "mcmc.phi_per_component")
      cfg.mcmc.phi_per_component = parse_bool(value, key);
    else if (key == "mcmc.slice_width") cfg.mcmc.slice_width = num();
    else if (key == "mcmc.slice_max_steps")
      cfg.mcmc.slice_max_steps = static_cast<int>(num());
    else if (key == "mcmc.rj_per_iter")
      cfg.mcmc.rj_moves_per_iter = static_cast<int>(num());
    else if (key == "mcmc.mode") cfg.mcmc.mode = parse_mode(value);
    else if (key == "mcmc.sample_mu") cfg.mcmc.sample_mu = parse_bool(value, key);
    else if (key == "mcmc.check_caches")
      cfg.mcmc.check_caches = parse_bool(value, key);
    else if (key == "sim.kind") {
      const std::string v = trim(value);
      if (v == "full") cfg.sim_kind = ScenarioKind::kFull;
      else if (v == "diagonal") cfg.sim_kind = ScenarioKind::kDiagonal;
      else throw std::invalid_argument("config: unknown sim.kind: " + value);
    } else if (key == "sim.p") cfg.sim_p = static_cast<int>(num());
    else if (key == "sim.n") cfg.sim_n = static_cast<int>(num());
    else if (key == "sim.miss_frac") cfg.sim_miss_frac = parse_double_list(value);
    else if (key == "predict.grid_nx") cfg.grid_nx = static_cast<int>(num());
    else if (key == "predict.grid_ny") cfg.grid_ny = static_cast<int>(num());
    else if (key == "predict.points") cfg.predict_points_file = trim(value);
    else if (key == "summary.distances")
      cfg.summary_distances = parse_double_list(value);
    else if (key == "bench.n_list") cfg.bench_n = parse_int_list(value);
    else if (key == "bench.p_list") cfg.bench_p = parse_int_list(value);
    else if (key == "bench.evals") cfg.bench_evals = static_cast<int>(num());
    else if (key == "bench.naive_evals")
      cfg.bench_naive_evals = static_cast<int>(num());
    else if (key == "bench.repeats") cfg.bench_repeats = static_cast<int>(num());
    else if (key == "bench.guard") cfg.bench_guard = static_cast<int>(num());
    else {
      std::ostringstream msg;
      msg << "config line " << line_no << ": unknown key '" << key << "'";
      throw std::invalid_argument(msg.str());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return parse_config_text(read_file(path));
}

IntMatrix parse_mask_text(const std::string& text) {
  const auto rows = split(trim(text), ';');
  const int p = static_cast<int>(rows.size());
  if (p < 1) throw std::invalid_argument("mask text: empty");
  IntMatrix mask(p, p);
  for (int i = 0; i < p; ++i) {
    const std::string row = trim(rows[i]);
    if (static_cast<int>(row.size()) != p)
      throw std::invalid_argument(
          "mask text: rows must all have length equal to the row count");
    for (int j = 0; j < p; ++j) {
      if (row[j] != '0' && row[j] != '1')
        throw std::invalid_argument("mask text: entries must be 0 or 1");
      mask(i, j) = row[j] - '0';
    }
  }
  return mask;
}

std::string mask_to_text(const IntMatrix& mask) {
  std::string out;
  for (int i = 0; i < mask.rows(); ++i) {
    if (i > 0) out.push_back(';');
    for (int j = 0; j < mask.cols(); ++j)
      out.push_back(mask(i, j) ? '1' : '0');
  }
  return out;
}

void write_key_values(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
}

std::vector<std::pair<std::string, std::string>> summary_key_values(
    const ChainSummaries& s) {
  std::vector<std::pair<std::string, std::string>> kv;
  const int p = static_cast<int>(s.cov_median.rows());
  const auto tag = [](const std::string& base, int i, int j) {
    std::ostringstream out;
    out << base << "_" << i + 1 << "_" << j + 1;
    return out.str();
  };
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) {
      kv.emplace_back(tag("cov_median", i, j), format_double(s.cov_median(i, j)));
      kv.emplace_back(tag("cov_q05", i, j), format_double(s.cov_q05(i, j)));
      kv.emplace_back(tag("cov_q95", i, j), format_double(s.cov_q95(i, j)));
    }
  for (size_t d = 0; d < s.distances.size(); ++d) {
    std::ostringstream base;
    base << "cross_d" << s.distances[d];
    for (int i = 0; i < p; ++i)
      for (int j = 0; j <= i; ++j) {
        kv.emplace_back(tag(base.str() + "_median", i, j),
                        format_double(s.cross_median[d](i, j)));
        kv.emplace_back(tag(base.str() + "_q05", i, j),
                        format_double(s.cross_q05[d](i, j)));
        kv.emplace_back(tag(base.str() + "_q95", i, j),
                        format_double(s.cross_q95[d](i, j)));
      }
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i < j)
        kv.emplace_back(tag("indep", i, j), format_double(s.indep_prob(i, j)));
  kv.emplace_back("nonzero_mean", format_double(s.nonzero_mean));
  kv.emplace_back("nonzero_median", format_double(s.nonzero_median));
  kv.emplace_back("nonzero_q05", format_double(s.nonzero_q05));
  kv.emplace_back("nonzero_q95", format_double(s.nonzero_q95));
  kv.emplace_back("ess_loglik", format_double(s.ess_loglik));
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      kv.emplace_back(tag("ess_c0", i, j), format_double(s.ess_c0(i, j)));
  return kv;
}

}  // namespace lmc
