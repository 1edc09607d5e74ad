#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace thmm {

struct TransportEntry {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
};

/// Sparse optimal plan; `objective` is sum(mass * cost) over `entries` in order.
struct TransportPlan {
  std::vector<TransportEntry> entries;
  double objective = 0.0;
};

/**
 * Exact solver for the balanced transportation problem
 *   min sum_ij c_ij f_ij  s.t.  sum_j f_ij = supply_i,  sum_i f_ij = demand_j,  f >= 0
 * by the primal network simplex method on the complete bipartite graph.
 *
 * Uses a Big-M artificial root with a strongly feasible spanning tree (no
 * cycling under degeneracy), block-search pivoting with a fixed scan order
 * and index tie-breaking, so repeated solves return the same plan.
 *
 * `cost` is row-major with supply.size() rows and demand.size() columns.
 * Supplies and demands must be positive and have equal totals within 1e-9;
 * std::invalid_argument otherwise.
 */
TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              std::span<const double> cost);

}  // namespace thmm
