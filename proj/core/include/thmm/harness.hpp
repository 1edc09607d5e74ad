#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "thmm/error_criterion.hpp"
#include "thmm/hmm_mle.hpp"
#include "thmm/ls_estimator.hpp"
#include "thmm/simulator.hpp"

namespace thmm {

enum class Estimator { Ls, Mle };

Estimator parse_estimator(const std::string& name);
std::string to_string(Estimator e);

/// Sweep over (n, r, D, replicate) on the cosine model.
struct ExperimentSpec {
  Estimator estimator = Estimator::Mle;
  double sigma_x = 0.1;
  double sigma_y = 0.1;
  std::vector<std::size_t> n_grid{5000, 20000};
  std::vector<std::size_t> r_grid{10, 20};
  /// Mixture sizes; ignored (recorded as 0) for the LS estimator.
  std::vector<std::size_t> d_grid{2};
  std::size_t n_seeds = 5;
  std::uint64_t base_seed = 2024;
  std::filesystem::path output_dir = "runs";
  PenaltySpec penalty;
  /// Per-estimator knobs; seeds inside are replaced per cell.
  EmConfig em;
  LsFitConfig ls;
  ErrorCriterionConfig eval;
  /// Cells run concurrently.
  std::size_t workers = 1;

  void validate() const;
};

struct Cell {
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t components = 0;
  std::size_t replicate = 0;
};

struct RunRecord {
  std::string hash;
  std::string estimator;
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t components = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  /// "w1" for the MLE error criterion, "l1" for the LS score.
  std::string metric;
  double error = 0.0;
  /// Log-likelihood (MLE) or criterion value (LS).
  double objective = 0.0;
  double wall_time = 0.0;
  std::string fit_path;
  std::string message;
};

struct RunStats {
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

/// Cells in sweep order: n, then r, then D, then replicate.
std::vector<Cell> experiment_cells(const ExperimentSpec& spec);

/// hash(base_seed, n, r, D, replicate); unaffected by the rest of the grid.
std::uint64_t cell_seed(const ExperimentSpec& spec, const Cell& cell);

/// Seed of the simulated series; shared by every (r, D) of a replicate so
/// all fits of one replicate see the same data, and shorter series are
/// prefixes of longer ones.
std::uint64_t series_seed(const ExperimentSpec& spec, const Cell& cell);

/// Exact settings a cell runs with, so a cell can be replayed piece by piece.
CosineModelConfig cell_model(const ExperimentSpec& spec, const Cell& cell);
EmConfig cell_em_config(const ExperimentSpec& spec, const Cell& cell);
LsFitConfig cell_ls_config(const ExperimentSpec& spec, const Cell& cell);
ErrorCriterionConfig cell_eval_config(const ExperimentSpec& spec, const Cell& cell);

/// Content hash (hex) of everything that determines a cell's result.
std::string cell_hash(const ExperimentSpec& spec, const Cell& cell);

/// Runs one cell without touching the file system (fit_path stays empty).
RunRecord run_cell(const ExperimentSpec& spec, const Cell& cell);

/// Runs every cell whose hash has no successful row in <output_dir>/runs.csv,
/// appending new rows in cell order and writing fits/<hash>.json for each.
/// Returns one record per cell (the stored one for skipped cells). Failures
/// are recorded and do not stop the sweep.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, RunStats* stats = nullptr);

struct SummaryRow {
  std::string estimator;
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t components = 0;
  std::size_t count = 0;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double mean = 0.0;
  /// Sample standard deviation (ddof = 1); 0 for a single record.
  double std = 0.0;
};

/// Order statistics and moments per (estimator, n, r, D) over successful
/// records, sorted by key. Even counts use the midpoint median.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

void write_runs_header(std::ostream& os);
void write_run_row(std::ostream& os, const RunRecord& rec);
std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path);

/// Header `estimator,n,r,D,min,median,max,mean,std`.
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

}  // namespace thmm
