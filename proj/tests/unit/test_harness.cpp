#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "thmm/harness.hpp"

namespace fs = std::filesystem;
using thmm::ExperimentSpec;
using thmm::RunRecord;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunRecord record(std::size_t n, double error, bool ok = true) {
  RunRecord r;
  r.estimator = "mle";
  r.n = n;
  r.r = 10;
  r.components = 2;
  r.ok = ok;
  r.error = error;
  return r;
}

ExperimentSpec tiny_mle(const fs::path& dir) {
  ExperimentSpec s;
  s.n_grid = {400, 800};
  s.r_grid = {3};
  s.d_grid = {1};
  s.n_seeds = 2;
  s.output_dir = dir;
  s.em.n_starts = 1;
  s.em.max_iters = 30;
  s.eval.n_x = 200;
  s.eval.n_w = 2;
  return s;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("summary statistics") {
  const auto rows = thmm::summarize({record(5, 1.0), record(5, 4.0), record(5, 2.0), record(5, 3.0),
                                     record(5, 100.0, false), record(7, 0.5)});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 5);
  CHECK(rows[0].count == 4);
  CHECK(rows[0].min == 1.0);
  CHECK(rows[0].max == 4.0);
  CHECK(rows[0].median == 2.5);
  CHECK(rows[0].mean == 2.5);
  CHECK(rows[0].std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-14));
  CHECK(rows[1].count == 1);
  CHECK(rows[1].median == 0.5);
  CHECK(rows[1].std == 0.0);
}

TEST_CASE("cells and seeds") {
  ExperimentSpec s;
  s.n_grid = {100, 200};
  s.r_grid = {4, 5};
  s.d_grid = {1, 2};
  s.n_seeds = 3;
  const auto cells = thmm::experiment_cells(s);
  CHECK(cells.size() == 24);
  CHECK(cells.front().n == 100);
  CHECK(cells.back().n == 200);

  // A cell's seed does not depend on the rest of the grid.
  const thmm::Cell c{200, 5, 2, 1};
  ExperimentSpec other = s;
  other.n_grid = {200};
  other.r_grid = {5, 9};
  CHECK(thmm::cell_seed(s, c) == thmm::cell_seed(other, c));
  CHECK(thmm::cell_hash(s, c) == thmm::cell_hash(other, c));
  CHECK(thmm::cell_seed(s, c) != thmm::cell_seed(s, {200, 5, 2, 2}));

  // The series is shared across r and D.
  CHECK(thmm::series_seed(s, c) == thmm::series_seed(s, {100, 4, 1, 1}));
  CHECK(thmm::series_seed(s, c) != thmm::series_seed(s, {200, 5, 2, 0}));

  // Anything that changes the result changes the hash.
  other = s;
  other.em.max_iters = 7;
  CHECK(thmm::cell_hash(s, c) != thmm::cell_hash(other, c));
  other = s;
  other.sigma_y = 0.2;
  CHECK(thmm::cell_hash(s, c) != thmm::cell_hash(other, c));
  other = s;
  other.workers = 4;
  CHECK(thmm::cell_hash(s, c) == thmm::cell_hash(other, c));

  ExperimentSpec ls = s;
  ls.estimator = thmm::Estimator::Ls;
  for (const auto& cell : thmm::experiment_cells(ls)) CHECK(cell.components == 0);
}

TEST_CASE("MLE sweep is resumable and idempotent") {
  const auto dir = fresh_dir("thmm_harness_mle");
  const auto spec = tiny_mle(dir);
  thmm::RunStats st;
  const auto first = thmm::run_experiment(spec, &st);
  CHECK(st.computed == 4);
  CHECK(st.failed == 0);
  for (const auto& r : first) {
    CHECK(r.ok);
    CHECK(r.metric == "w1");
    CHECK(r.error > 0.0);
    CHECK(fs::exists(dir / r.fit_path));
  }
  const auto runs = slurp(dir / "runs.csv");
  const auto summary = slurp(dir / "summary.csv");
  CHECK(summary.rfind("estimator,n,r,D,min,median,max,mean,std\n", 0) == 0);

  const auto second = thmm::run_experiment(spec, &st);
  CHECK(st.computed == 0);
  CHECK(st.skipped == 4);
  CHECK(slurp(dir / "runs.csv") == runs);
  CHECK(slurp(dir / "summary.csv") == summary);
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(second[i].error == first[i].error);

  // The stored rows parse back to the same values.
  const auto parsed = thmm::read_runs_csv(dir / "runs.csv");
  REQUIRE(parsed.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(parsed[i].hash == first[i].hash);
    CHECK(parsed[i].error == first[i].error);
  }
  const auto rows = thmm::read_summary_csv(dir / "summary.csv");
  const auto expect = thmm::summarize(first);
  REQUIRE(rows.size() == expect.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].median == expect[i].median);
    CHECK(rows[i].std == expect[i].std);
  }

  // run_cell reproduces a stored cell without the file system.
  const auto cells = thmm::experiment_cells(spec);
  CHECK(thmm::run_cell(spec, cells[1]).error == first[1].error);

  // A larger grid reuses the finished cells.
  auto wider = spec;
  wider.n_seeds = 3;
  thmm::run_experiment(wider, &st);
  CHECK(st.skipped == 4);
  CHECK(st.computed == 2);
  fs::remove_all(dir);
}

TEST_CASE("failures are recorded, not fatal") {
  const auto dir = fresh_dir("thmm_harness_fail");
  auto spec = tiny_mle(dir);
  spec.n_grid = {400};
  spec.n_seeds = 1;
  spec.eval.max_arcs = 10;
  thmm::RunStats st;
  const auto recs = thmm::run_experiment(spec, &st);
  REQUIRE(recs.size() == 1);
  CHECK_FALSE(recs[0].ok);
  CHECK_FALSE(recs[0].message.empty());
  CHECK(st.failed == 1);
  const auto stored = thmm::read_runs_csv(dir / "runs.csv");
  REQUIRE(stored.size() == 1);
  CHECK_FALSE(stored[0].ok);
  CHECK_FALSE(stored[0].message.empty());
  // A failed cell is retried on the next run.
  thmm::run_experiment(spec, &st);
  CHECK(st.skipped == 0);
  fs::remove_all(dir);
}

TEST_CASE("LS sweep") {
  const auto dir = fresh_dir("thmm_harness_ls");
  ExperimentSpec s;
  s.estimator = thmm::Estimator::Ls;
  s.n_grid = {500};
  s.r_grid = {3};
  s.n_seeds = 2;
  s.output_dir = dir;
  s.ls.budget = 200;
  s.ls.nodes = 100;
  thmm::RunStats st;
  const auto recs = thmm::run_experiment(s, &st);
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    CHECK(r.ok);
    CHECK(r.metric == "l1");
    CHECK(r.error >= 0.0);
    CHECK(r.error <= 2.0);
    CHECK(r.components == 0);
  }
  thmm::run_experiment(s, &st);
  CHECK(st.computed == 0);
  fs::remove_all(dir);
}

TEST_CASE("spec validation") {
  ExperimentSpec s;
  CHECK_NOTHROW(s.validate());
  s.n_seeds = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.r_grid.clear();
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_THROWS_AS(thmm::parse_estimator("em"), std::invalid_argument);
}
