#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thmm/hmm_mle.hpp"

namespace thmm {

/// Constant of the log-log penalty form, calibrated once on a synthetic three-state
/// chain (n = 50000) and frozen here. Any value in roughly [2e-15, 1e-11]
/// selected the true order on that chain.
inline constexpr double kCalibratedLogLogConstant = 1e-13;

struct SelectionRow {
  std::size_t r = 0;
  std::size_t components = 0;
  bool fitted = false;
  bool skipped = false;
  std::string message;
  double loglik = 0.0;
  double penalty = 0.0;
  double penalized = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SelectionResult {
  FitReport best;
  std::vector<SelectionRow> table;
  std::vector<std::string> warnings;
  /// Penalty actually used (the slope heuristic fills in its fitted constant).
  PenaltySpec penalty;
};

/// Fits every (r, D) of the grids with r <= log n (others are skipped with a
/// warning) and returns the penalized-likelihood argmax. Ties go to the
/// smaller r, then the smaller D. Throws std::runtime_error listing every
/// cell's failure when no fit succeeds.
SelectionResult select_model(std::span<const double> y, std::span<const std::size_t> r_grid,
                             std::span<const std::size_t> d_grid, const EmConfig& em,
                             const PenaltySpec& pen);

/// Parses "paper-simple", "appendix" or "slope-heuristic".
PenaltyForm parse_penalty_form(const std::string& name);
std::string to_string(PenaltyForm form);

}  // namespace thmm
