#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace thmm {

using Point2 = std::array<double, 2>;

/// Weighted point cloud on R^2 with weights summing to one.
struct DiscreteMeasure2D {
  std::vector<Point2> points;
  std::vector<double> weights;

  static DiscreteMeasure2D empirical(std::vector<Point2> samples);

  std::size_t size() const noexcept { return points.size(); }
  /// Throws std::invalid_argument on NaN coordinates, negative weights,
  /// mismatched lengths or |sum - 1| > 1e-12.
  void validate() const;
  /// Duplicate points merged (weights summed), zero-weight atoms dropped,
  /// points in lexicographic order.
  DiscreteMeasure2D merged() const;
  /// Every atom moved by (dx, dy).
  DiscreteMeasure2D translated(double dx, double dy) const;
};

}  // namespace thmm
