#include "thmm/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace thmm {

using nlohmann::json;

void to_json(json& j, const GridDensity2D& d) {
  j = json{{"r", d.r}, {"p", d.p}, {"shift", d.shift}};
}

void from_json(const json& j, GridDensity2D& d) {
  d.r = j.at("r").get<std::size_t>();
  d.p = j.at("p").get<std::vector<double>>();
  d.shift = j.value("shift", 0.0);
  d.validate();
}

void to_json(json& j, const GaussianMixture& g) {
  j = json{{"weights", g.weights}, {"means", g.means}, {"stds", g.stds}};
}

void from_json(const json& j, GaussianMixture& g) {
  g.weights = j.at("weights").get<std::vector<double>>();
  g.means = j.at("means").get<std::vector<double>>();
  g.stds = j.at("stds").get<std::vector<double>>();
}

void to_json(json& j, const HmmParams& p) {
  const auto r = static_cast<Eigen::Index>(p.states());
  std::vector<double> q;
  q.reserve(static_cast<std::size_t>(r * r));
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index b = 0; b < r; ++b) q.push_back(p.transition(a, b));
  }
  j = json{{"support", p.support}, {"Q", q}, {"mixture", p.noise}};
}

void from_json(const json& j, HmmParams& p) {
  p.support = j.at("support").get<std::vector<double>>();
  const auto q = j.at("Q").get<std::vector<double>>();
  const auto r = static_cast<Eigen::Index>(p.support.size());
  if (q.size() != p.support.size() * p.support.size()) {
    throw std::invalid_argument("HmmParams json: Q must have r*r entries");
  }
  p.transition.resize(r, r);
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index b = 0; b < r; ++b) p.transition(a, b) = q[static_cast<std::size_t>(a * r + b)];
  }
  p.noise = j.at("mixture").get<GaussianMixture>();
  p.validate();
}

void to_json(json& j, const CmaTraceRow& row) {
  j = json{{"generation", row.generation}, {"evals", row.evaluations}, {"best_value", row.best_value}};
}

void to_json(json& j, const LsFitConfig& cfg) {
  j = json{{"r", cfg.r},         {"nodes", cfg.nodes}, {"sigma_w", cfg.sigma_w},
           {"budget", cfg.budget}, {"seed", cfg.seed},   {"sigma0", cfg.sigma0}};
}

void to_json(json& j, const LsFitResult& fit) {
  j = json{{"estimator", "ls"},
           {"density", fit.density},
           {"criterion_value", fit.criterion_value},
           {"evaluations", fit.evaluations},
           {"wall_time", fit.wall_time},
           {"trace", fit.trace}};
}

void to_json(json& j, const EmConfig& cfg) {
  j = json{{"max_iters", cfg.max_iters}, {"tol", cfg.tol},
           {"n_starts", cfg.n_starts},   {"seed", cfg.seed},
           {"update_support", cfg.update_support}, {"floor_q", cfg.floor_q},
           {"s_floor", cfg.s_floor}};
}

void to_json(json& j, const FitReport& fit) {
  j = json{{"estimator", "mle"},         {"params", fit.params},
           {"loglik", fit.loglik},       {"penalized", fit.penalized},
           {"iterations", fit.iterations}, {"converged", fit.converged},
           {"n", fit.n},                 {"start", fit.start}};
}

void to_json(json& j, const SelectionRow& row) {
  j = json{{"r", row.r},
           {"D", row.components},
           {"fitted", row.fitted},
           {"skipped", row.skipped},
           {"message", row.message},
           {"loglik", row.loglik},
           {"penalty", row.penalty},
           {"penalized", row.penalized},
           {"iterations", row.iterations},
           {"converged", row.converged}};
}

void to_json(json& j, const ErrorCriterionResult& res) {
  j = json{{"error", res.error}, {"per_replicate", res.per_replicate}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace thmm
