#include "experiment_config.hpp"

#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>

#include "thmm/model_selection.hpp"

namespace thmm::cli {

ExperimentSpec fig_mle_preset(bool full) {
  ExperimentSpec spec;
  spec.estimator = Estimator::Mle;
  spec.d_grid = {2};
  spec.output_dir = "runs/fig-mle";
  if (full) {
    spec.n_grid = {5000, 10000, 20000, 50000, 100000, 200000};
    spec.r_grid = {10, 20, 30};
    spec.n_seeds = 10;
  } else {
    spec.n_grid = {5000, 20000};
    spec.r_grid = {10, 20};
    spec.n_seeds = 5;
  }
  return spec;
}

ExperimentSpec fig_ls_preset(bool full) {
  ExperimentSpec spec;
  spec.estimator = Estimator::Ls;
  spec.d_grid = {};
  spec.output_dir = "runs/fig-ls";
  if (full) {
    spec.n_grid = {100000};
    spec.r_grid = {10, 20, 30};
    spec.n_seeds = 10;
    spec.ls.budget = 75000;
  } else {
    spec.n_grid = {20000};
    spec.r_grid = {10};
    spec.n_seeds = 5;
    spec.ls.budget = 20000;
  }
  return spec;
}

namespace {

// Grids are either integer arrays or a parse_grid string.
std::vector<std::size_t> grid(const TomlDocument& doc, const std::string& key) {
  if (!doc.is_array(key)) return parse_grid(doc.get_string(key));
  const auto v = doc.get_uint_array(key);
  return {v.begin(), v.end()};
}

}  // namespace

void apply_config(const TomlDocument& doc, ExperimentSpec& spec) {
  static const std::set<std::string> known = {
      "experiment.estimator", "experiment.n_grid",   "experiment.r_grid",
      "experiment.D_grid",    "experiment.n_seeds",  "experiment.base_seed",
      "experiment.output_dir", "experiment.workers", "model.sigma_x",
      "model.sigma_y",        "em.max_iters",        "em.tol",
      "em.n_starts",          "em.update_support",   "em.floor_q",
      "em.s_floor",           "penalty.form",        "penalty.constant",
      "ls.nodes",             "ls.sigma_w",          "ls.budget",
      "ls.sigma0",            "eval.n_x",            "eval.n_w"};
  for (const auto& key : doc.keys()) {
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  auto has = [&](const char* k) { return doc.contains(k); };

  if (has("experiment.estimator")) spec.estimator = parse_estimator(doc.get_string("experiment.estimator"));
  if (has("experiment.n_grid")) spec.n_grid = grid(doc, "experiment.n_grid");
  if (has("experiment.r_grid")) spec.r_grid = grid(doc, "experiment.r_grid");
  if (has("experiment.D_grid")) spec.d_grid = grid(doc, "experiment.D_grid");
  if (has("experiment.n_seeds")) spec.n_seeds = doc.get_uint("experiment.n_seeds");
  if (has("experiment.base_seed")) spec.base_seed = doc.get_uint("experiment.base_seed");
  if (has("experiment.output_dir")) spec.output_dir = doc.get_string("experiment.output_dir");
  if (has("experiment.workers")) spec.workers = doc.get_uint("experiment.workers");
  if (has("model.sigma_x")) spec.sigma_x = doc.get_double("model.sigma_x");
  if (has("model.sigma_y")) spec.sigma_y = doc.get_double("model.sigma_y");
  if (has("em.max_iters")) spec.em.max_iters = doc.get_uint("em.max_iters");
  if (has("em.tol")) spec.em.tol = doc.get_double("em.tol");
  if (has("em.n_starts")) spec.em.n_starts = doc.get_uint("em.n_starts");
  if (has("em.update_support")) spec.em.update_support = doc.get_bool("em.update_support");
  if (has("em.floor_q")) spec.em.floor_q = doc.get_double("em.floor_q");
  if (has("em.s_floor")) spec.em.s_floor = doc.get_double("em.s_floor");
  if (has("penalty.form")) spec.penalty.form = parse_penalty_form(doc.get_string("penalty.form"));
  if (has("penalty.constant")) spec.penalty.constant = doc.get_double("penalty.constant");
  if (has("ls.nodes")) spec.ls.nodes = doc.get_uint("ls.nodes");
  if (has("ls.sigma_w")) spec.ls.sigma_w = doc.get_double("ls.sigma_w");
  if (has("ls.budget")) spec.ls.budget = doc.get_uint("ls.budget");
  if (has("ls.sigma0")) spec.ls.sigma0 = doc.get_double("ls.sigma0");
  if (has("eval.n_x")) spec.eval.n_x = doc.get_uint("eval.n_x");
  if (has("eval.n_w")) spec.eval.n_w = doc.get_uint("eval.n_w");
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad grid value '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  try {
    if (text.find(':') != std::string::npos) {
      std::vector<std::string> parts;
      std::istringstream is(text);
      for (std::string p; std::getline(is, p, ':');) parts.push_back(p);
      if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("bad range");
      const std::size_t lo = number(parts[0]);
      const std::size_t hi = number(parts[1]);
      const std::size_t step = parts.size() == 3 ? number(parts[2]) : 1;
      if (step == 0 || lo > hi) throw std::invalid_argument("bad range");
      for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
    } else {
      std::istringstream is(text);
      for (std::string p; std::getline(is, p, ',');) out.push_back(number(p));
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("cannot parse grid '" + text + "'");
  }
  if (out.empty()) throw std::invalid_argument("empty grid '" + text + "'");
  return out;
}

std::size_t workers_from_env() {
  const char* env = std::getenv("THMM_WORKERS");
  if (!env || !*env) return 1;
  try {
    const unsigned long v = std::stoul(env);
    return v == 0 ? 1 : static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("THMM_WORKERS must be a positive integer, got '") + env + "'");
  }
}

}  // namespace thmm::cli
