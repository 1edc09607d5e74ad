#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "thmm/charfn.hpp"
#include "thmm/cma_es.hpp"
#include "thmm/simulator.hpp"

namespace thmm {

struct LsFitConfig {
  std::size_t r = 10;
  std::size_t nodes = WeightNodes::kDefaultCount;
  double sigma_w = WeightNodes::kDefaultSigma;
  std::size_t budget = 75000;
  std::uint64_t seed = 0;
  double sigma0 = 0.5;
  std::size_t workers = 1;

  void validate() const;
};

struct LsFitResult {
  GridDensity2D density;
  double criterion_value = 0.0;
  std::vector<CmaTraceRow> trace;
  std::size_t evaluations = 0;
  double wall_time = 0.0;
};

/// The weight nodes fit_ls draws for this configuration.
WeightNodes ls_weight_nodes(const LsFitConfig& cfg);

/// Least-squares characteristic-function fit over r x r grid densities on (-1, 1)^2.
/// The CMA-ES search runs in softmax coordinates started at theta ~ N(0, I).
LsFitResult fit_ls(const TimeSeries& series, const LsFitConfig& cfg);

/// Frequencies (1/n) sum_{k=1}^{n-1} 1{(X_k, X_{k+1}) in cell(i, j)} on the grid of `geometry`.
std::vector<double> empirical_pair_frequencies(const std::vector<double>& latent,
                                               const GridDensity2D& geometry);

/// (1/r^2) sum_ij |p_fit(i, j) - p_emp(i, j)| against the latent pair frequencies.
double l1_score(const GridDensity2D& fit, const TimeSeries& latent);

}  // namespace thmm
