#pragma once

#include <cstddef>
#include <vector>

#include "thmm/measure.hpp"
#include "thmm/network_simplex.hpp"

namespace thmm {

/// Weighted atoms on the real line; weights must sum to one.
struct DiscreteMeasure1D {
  std::vector<double> points;
  std::vector<double> weights;

  static DiscreteMeasure1D dirac(double x) { return {{x}, {1.0}}; }
};

/// Exact W1 on the line as the area between the two CDFs.
/// Throws std::invalid_argument unless both weight vectors sum to 1 within 1e-12.
double w1_1d(const DiscreteMeasure1D& a, const DiscreteMeasure1D& b);

struct W1Options {
  /// Upper bound on (merged) |a| * |b|; std::length_error beyond it.
  std::size_t max_arcs = 1'000'000;
};

struct W1Result {
  double value = 0.0;
  /// Indices refer to `source` and `target`, the merged inputs.
  TransportPlan plan;
  DiscreteMeasure2D source;
  DiscreteMeasure2D target;
};

/// Exact W1 between two discrete measures on R^2 with Euclidean ground cost.
/// Duplicate atoms are merged and zero weights dropped before solving.
W1Result w1_2d(const DiscreteMeasure2D& a, const DiscreteMeasure2D& b, const W1Options& opts = {});

}  // namespace thmm
