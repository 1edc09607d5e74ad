#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "thmm/hmm_mle.hpp"
#include "thmm/measure.hpp"

namespace thmm {

/// Draws `count` i.i.d. pairs (X_1, X_2) from the true chain.
using PairSampler = std::function<std::vector<Point2>(std::uint64_t seed, std::size_t count)>;

struct ErrorCriterionConfig {
  std::size_t n_x = 5000;
  std::size_t n_w = 4;
  std::uint64_t seed = 0;
  /// Replicates solved concurrently (results do not depend on it).
  std::size_t workers = 1;
  std::size_t max_arcs = 10'000'000;
};

struct ErrorCriterionResult {
  double error = 0.0;
  std::vector<double> per_replicate;
};

/// Mean over n_w replicates of W1 between `fitted` and the empirical law of
/// n_x fresh pairs; replicate j uses seed derive_seed({cfg.seed, j}).
ErrorCriterionResult error_criterion(const DiscreteMeasure2D& fitted, const PairSampler& truth,
                                     const ErrorCriterionConfig& cfg);

/// Same, with the fitted law taken as pair_law(fit).
ErrorCriterionResult error_criterion(const HmmParams& fit, const PairSampler& truth,
                                     const ErrorCriterionConfig& cfg);

PairSampler cosine_pair_sampler(double sigma_x);
PairSampler finite_pair_sampler(FiniteHmmTruth truth);

}  // namespace thmm
