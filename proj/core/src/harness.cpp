#include "thmm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "thmm/json_io.hpp"
#include "thmm/rng.hpp"
#include "thmm/simulator.hpp"

namespace thmm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kFitTag = 1;
constexpr std::uint64_t kEvalTag = 2;
constexpr std::uint64_t kSeriesTag = 0x736572696573ULL;
constexpr const char* kRunsHeader =
    "hash,estimator,n,r,D,replicate,seed,status,metric,error,objective,wall_time,fit_path,message";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::size_t as_size(const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); }

struct CellOutcome {
  RunRecord record;
  json artifact;
};

CellOutcome compute_cell(const ExperimentSpec& spec, const Cell& cell) {
  CellOutcome out;
  RunRecord& rec = out.record;
  rec.hash = cell_hash(spec, cell);
  rec.estimator = to_string(spec.estimator);
  rec.n = cell.n;
  rec.r = cell.r;
  rec.components = cell.components;
  rec.replicate = cell.replicate;
  rec.seed = cell_seed(spec, cell);
  rec.metric = spec.estimator == Estimator::Mle ? "w1" : "l1";

  const auto start = std::chrono::steady_clock::now();
  try {
    const CosineModelConfig model = cell_model(spec, cell);
    const TimeSeries series = simulate_cosine(model);

    json artifact = {{"cell",
                      {{"n", cell.n},
                       {"r", cell.r},
                       {"D", cell.components},
                       {"replicate", cell.replicate},
                       {"seed", rec.seed},
                       {"series_seed", model.seed}}}};
    if (spec.estimator == Estimator::Mle) {
      const FitReport fit =
          fit_mle(series.y, cell.r, cell.components, cell_em_config(spec, cell), spec.penalty);
      const ErrorCriterionResult err =
          error_criterion(fit.params, cosine_pair_sampler(spec.sigma_x), cell_eval_config(spec, cell));
      rec.error = err.error;
      rec.objective = fit.loglik;
      artifact["fit"] = fit;
      artifact["evaluation"] = err;
    } else {
      const LsFitResult fit = fit_ls(series, cell_ls_config(spec, cell));
      rec.error = l1_score(fit.density, series);
      rec.objective = fit.criterion_value;
      artifact["fit"] = fit;
      artifact["evaluation"] = {{"l1", rec.error},
                                {"empirical", empirical_pair_frequencies(*series.x, fit.density)}};
    }
    rec.ok = std::isfinite(rec.error);
    if (!rec.ok) rec.message = "non-finite error";
    out.artifact = std::move(artifact);
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.message = e.what();
  }
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

Estimator parse_estimator(const std::string& name) {
  if (name == "ls") return Estimator::Ls;
  if (name == "mle") return Estimator::Mle;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

CosineModelConfig cell_model(const ExperimentSpec& spec, const Cell& cell) {
  CosineModelConfig model;
  model.sigma_x = spec.sigma_x;
  model.sigma_y = spec.sigma_y;
  model.n = cell.n;
  model.seed = series_seed(spec, cell);
  return model;
}

EmConfig cell_em_config(const ExperimentSpec& spec, const Cell& cell) {
  EmConfig em = spec.em;
  em.seed = derive_seed({cell_seed(spec, cell), kFitTag});
  return em;
}

LsFitConfig cell_ls_config(const ExperimentSpec& spec, const Cell& cell) {
  LsFitConfig ls = spec.ls;
  ls.r = cell.r;
  ls.seed = derive_seed({cell_seed(spec, cell), kFitTag});
  return ls;
}

ErrorCriterionConfig cell_eval_config(const ExperimentSpec& spec, const Cell& cell) {
  ErrorCriterionConfig eval = spec.eval;
  eval.seed = derive_seed({cell_seed(spec, cell), kEvalTag});
  return eval;
}

std::string to_string(Estimator e) { return e == Estimator::Ls ? "ls" : "mle"; }

void ExperimentSpec::validate() const {
  if (n_grid.empty() || r_grid.empty()) throw std::invalid_argument("ExperimentSpec: empty grid");
  if (estimator == Estimator::Mle && d_grid.empty()) {
    throw std::invalid_argument("ExperimentSpec: empty D grid");
  }
  if (n_seeds == 0) throw std::invalid_argument("ExperimentSpec: n_seeds must be >= 1");
  for (std::size_t n : n_grid) {
    if (n < 3) throw std::invalid_argument("ExperimentSpec: n must be >= 3");
  }
  for (std::size_t r : r_grid) {
    if (r == 0) throw std::invalid_argument("ExperimentSpec: r must be >= 1");
  }
  for (std::size_t d : d_grid) {
    if (d == 0) throw std::invalid_argument("ExperimentSpec: D must be >= 1");
  }
  if (!(sigma_x >= 0.0) || !(sigma_y >= 0.0)) {
    throw std::invalid_argument("ExperimentSpec: noise levels must be nonnegative");
  }
}

std::vector<Cell> experiment_cells(const ExperimentSpec& spec) {
  const std::vector<std::size_t> ds =
      spec.estimator == Estimator::Mle ? spec.d_grid : std::vector<std::size_t>{0};
  std::vector<Cell> cells;
  for (std::size_t n : spec.n_grid) {
    for (std::size_t r : spec.r_grid) {
      for (std::size_t d : ds) {
        for (std::size_t rep = 0; rep < spec.n_seeds; ++rep) cells.push_back({n, r, d, rep});
      }
    }
  }
  return cells;
}

std::uint64_t cell_seed(const ExperimentSpec& spec, const Cell& cell) {
  return derive_seed({spec.base_seed, cell.n, cell.r, cell.components, cell.replicate});
}

std::uint64_t series_seed(const ExperimentSpec& spec, const Cell& cell) {
  return derive_seed({spec.base_seed, kSeriesTag, cell.replicate});
}

std::string cell_hash(const ExperimentSpec& spec, const Cell& cell) {
  json key = {{"format", 1},
              {"estimator", to_string(spec.estimator)},
              {"sigma_x", spec.sigma_x},
              {"sigma_y", spec.sigma_y},
              {"base_seed", spec.base_seed},
              {"n", cell.n},
              {"r", cell.r},
              {"D", cell.components},
              {"replicate", cell.replicate}};
  if (spec.estimator == Estimator::Mle) {
    json em = spec.em;
    em.erase("seed");
    key["em"] = em;
    key["penalty"] = {{"form", to_string(spec.penalty.form)}, {"constant", spec.penalty.constant}};
    key["eval"] = {{"n_x", spec.eval.n_x}, {"n_w", spec.eval.n_w}};
  } else {
    json ls = spec.ls;
    ls.erase("seed");
    ls.erase("r");
    key["ls"] = ls;
  }
  return hex(fnv1a(key.dump()));
}

RunRecord run_cell(const ExperimentSpec& spec, const Cell& cell) {
  return compute_cell(spec, cell).record;
}

void write_runs_header(std::ostream& os) { os << kRunsHeader << '\n'; }

void write_run_row(std::ostream& os, const RunRecord& rec) {
  std::ostringstream line;
  line << std::setprecision(17);
  line << rec.hash << ',' << rec.estimator << ',' << rec.n << ',' << rec.r << ','
       << rec.components << ',' << rec.replicate << ',' << rec.seed << ','
       << (rec.ok ? "ok" : "failed") << ',' << rec.metric << ',' << rec.error << ','
       << rec.objective << ',' << rec.wall_time << ',' << csv_safe(rec.fit_path) << ','
       << csv_safe(rec.message) << '\n';
  os << line.str();
}

std::vector<RunRecord> read_runs_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRunsHeader) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<RunRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 14) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 14 fields");
    }
    RunRecord rec;
    rec.hash = f[0];
    rec.estimator = f[1];
    rec.n = as_size(f[2]);
    rec.r = as_size(f[3]);
    rec.components = as_size(f[4]);
    rec.replicate = as_size(f[5]);
    rec.seed = std::stoull(f[6]);
    rec.ok = f[7] == "ok";
    rec.metric = f[8];
    rec.error = std::stod(f[9]);
    rec.objective = std::stod(f[10]);
    rec.wall_time = std::stod(f[11]);
    rec.fit_path = f[12];
    rec.message = f[13];
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, RunStats* stats) {
  spec.validate();
  fs::create_directories(spec.output_dir / "fits");
  const fs::path runs_path = spec.output_dir / "runs.csv";

  std::map<std::string, RunRecord> done;
  if (fs::exists(runs_path)) {
    for (auto& rec : read_runs_csv(runs_path)) {
      if (rec.ok) done[rec.hash] = std::move(rec);
    }
  } else {
    std::ofstream init(runs_path);
    write_runs_header(init);
  }

  const std::vector<Cell> cells = experiment_cells(spec);
  std::vector<std::optional<RunRecord>> results(cells.size());
  std::vector<std::size_t> todo;
  RunStats local;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto it = done.find(cell_hash(spec, cells[c]));
    if (it != done.end()) {
      results[c] = it->second;
      ++local.skipped;
    } else {
      todo.push_back(c);
    }
  }

  std::ofstream runs(runs_path, std::ios::app);
  if (!runs) throw std::runtime_error("cannot append to " + runs_path.string());
  std::mutex mu;
  std::vector<char> finished(todo.size(), 0);
  std::size_t flushed = 0;
  std::atomic<std::size_t> next{0};

  // Rows are appended in cell order regardless of completion order.
  auto worker = [&] {
    for (std::size_t t = next++; t < todo.size(); t = next++) {
      const Cell& cell = cells[todo[t]];
      CellOutcome outcome = compute_cell(spec, cell);
      if (outcome.record.ok) {
        const fs::path rel = fs::path("fits") / (outcome.record.hash + ".json");
        outcome.artifact["record"] = {{"hash", outcome.record.hash},
                                      {"estimator", outcome.record.estimator},
                                      {"metric", outcome.record.metric},
                                      {"error", outcome.record.error}};
        try {
          write_json_file(spec.output_dir / rel, outcome.artifact);
          outcome.record.fit_path = rel.generic_string();
        } catch (const std::exception& e) {
          outcome.record.ok = false;
          outcome.record.message = e.what();
        }
      }
      std::lock_guard lock(mu);
      results[todo[t]] = std::move(outcome.record);
      finished[t] = 1;
      while (flushed < todo.size() && finished[flushed]) {
        const RunRecord& rec = *results[todo[flushed]];
        write_run_row(runs, rec);
        ++(rec.ok ? local.computed : local.failed);
        ++flushed;
      }
      runs.flush();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(spec.workers, 1, std::max<std::size_t>(todo.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<RunRecord> records;
  records.reserve(cells.size());
  for (auto& r : results) records.push_back(std::move(*r));
  write_summary_csv(spec.output_dir / "summary.csv", summarize(records));
  if (stats) *stats = local;
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::map<std::tuple<std::string, std::size_t, std::size_t, std::size_t>, std::vector<double>> groups;
  for (const auto& rec : records) {
    if (rec.ok) groups[{rec.estimator, rec.n, rec.r, rec.components}].push_back(rec.error);
  }
  std::vector<SummaryRow> out;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    SummaryRow row;
    std::tie(row.estimator, row.n, row.r, row.components) = key;
    const std::size_t k = values.size();
    row.count = k;
    row.min = values.front();
    row.max = values.back();
    row.median = k % 2 == 1 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / static_cast<double>(k);
    if (k > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - row.mean) * (v - row.mean);
      row.std = std::sqrt(ss / static_cast<double>(k - 1));
    }
    out.push_back(row);
  }
  return out;
}

void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "estimator,n,r,D,min,median,max,mean,std\n";
  for (const auto& row : rows) {
    out << row.estimator << ',' << row.n << ',' << row.r << ',' << row.components << ','
        << row.min << ',' << row.median << ',' << row.max << ',' << row.mean << ',' << row.std
        << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "estimator,n,r,D,min,median,max,mean,std") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<SummaryRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw std::runtime_error(path.string() + ": expected 9 fields");
    SummaryRow row;
    row.estimator = f[0];
    row.n = as_size(f[1]);
    row.r = as_size(f[2]);
    row.components = as_size(f[3]);
    row.min = std::stod(f[4]);
    row.median = std::stod(f[5]);
    row.max = std::stod(f[6]);
    row.mean = std::stod(f[7]);
    row.std = std::stod(f[8]);
    out.push_back(row);
  }
  return out;
}

}  // namespace thmm
