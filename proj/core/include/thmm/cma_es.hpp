#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thmm/charfn.hpp"

namespace thmm {

/// Settings for cma_minimize. Zero lambda/mu select the usual defaults
/// lambda = 4 + floor(3 ln dim), mu = floor(lambda / 2).
struct CmaConfig {
  std::size_t dim = 1;
  std::size_t lambda = 0;
  std::size_t mu = 0;
  double sigma0 = 0.5;
  std::size_t max_evaluations = 75000;
  std::uint64_t seed = 0;
  std::optional<double> target_value;
  /// Starting mean; drawn from N(0, I) with the run seed when absent.
  std::optional<std::vector<double>> initial_mean;
  /// Threads used to evaluate the offspring of one generation.
  std::size_t workers = 1;

  /// Fills in defaults and checks mu <= lambda <= max_evaluations.
  CmaConfig resolved() const;
};

struct CmaTraceRow {
  std::size_t generation = 0;
  std::size_t evaluations = 0;
  double best_value = 0.0;
};

struct CmaResult {
  std::vector<double> best_point;
  double best_value = 0.0;
  std::size_t evaluations = 0;
  std::vector<CmaTraceRow> trace;
};

/// Raised when the objective throws; carries the point being evaluated.
class OptimizerFailure : public std::runtime_error {
 public:
  OptimizerFailure(const std::string& what, std::vector<double> point)
      : std::runtime_error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

using Objective = std::function<double(std::span<const double>)>;

/**
 * (mu/mu_w, lambda) CMA-ES with rank-one and rank-mu covariance updates and
 * cumulative step-size adaptation.
 *
 * The objective is called at most cfg.max_evaluations times. When fewer
 * than lambda evaluations remain, a truncated last generation is sampled and
 * only used to update the best-so-far point. Ranking breaks value ties by
 * offspring index, so results do not depend on cfg.workers.
 */
CmaResult cma_minimize(const Objective& objective, const CmaConfig& cfg);

/// Softmax map from R^{r^2} onto the cell-probability simplex of an r x r grid.
/// Throws std::invalid_argument unless theta.size() is a nonzero perfect square.
GridDensity2D simplex_reparam(std::span<const double> theta);

}  // namespace thmm
