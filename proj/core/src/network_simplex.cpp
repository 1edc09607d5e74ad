#include "thmm/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace thmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOptimalityEps = 1e-12;
constexpr double kFeasibilityEps = 1e-9;

// Nodes 0..m-1 are sources, m..m+n-1 sinks, m+n the artificial root.
// Arc i*n + j joins source i to sink j; arc m*n + u is the artificial arc of node u.
class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                   std::span<const double> cost)
      : m_(supply.size()),
        n_(demand.size()),
        nodes_(m_ + n_),
        root_(m_ + n_),
        arcs_(m_ * n_),
        cost_(cost) {
    const double max_cost = cost.empty() ? 0.0 : *std::max_element(cost.begin(), cost.end());
    artificial_cost_ = (std::max(max_cost, 0.0) + 1.0) * static_cast<double>(nodes_ + 1);

    flow_.assign(arcs_ + nodes_, 0.0);
    in_tree_.assign(arcs_ + nodes_, 0);
    parent_.resize(nodes_ + 1);
    pred_.resize(nodes_ + 1);
    up_.resize(nodes_ + 1);
    depth_.resize(nodes_ + 1);
    pi_.resize(nodes_ + 1);
    children_.resize(nodes_ + 1);

    parent_[root_] = root_;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    children_[root_].reserve(nodes_);
    for (std::size_t u = 0; u < nodes_; ++u) {
      const std::size_t a = arcs_ + u;
      parent_[u] = root_;
      pred_[u] = a;
      depth_[u] = 1;
      in_tree_[a] = 1;
      children_[root_].push_back(u);
      if (u < m_) {
        up_[u] = 1;
        flow_[a] = supply[u];
        pi_[u] = 0.0;
      } else {
        up_[u] = 0;
        flow_[a] = demand[u - m_];
        pi_[u] = artificial_cost_;
      }
    }
    block_ = std::max<std::size_t>(
        10, static_cast<std::size_t>(std::sqrt(static_cast<double>(std::max<std::size_t>(arcs_, 1)))));
  }

  TransportPlan run() {
    initial_pivots();
    std::size_t arc = 0;
    while (find_entering(arc)) pivot(arc);

    for (std::size_t u = 0; u < nodes_; ++u) {
      if (flow_[arcs_ + u] > kFeasibilityEps) {
        throw std::runtime_error("solve_transport: infeasible residual " +
                                 std::to_string(flow_[arcs_ + u]));
      }
    }

    TransportPlan plan;
    for (std::size_t a = 0; a < arcs_; ++a) {
      if (flow_[a] > 0.0) {
        plan.entries.push_back({a / n_, a % n_, flow_[a]});
        plan.objective += flow_[a] * cost_[a];
      }
    }
    return plan;
  }

 private:
  std::size_t source_of(std::size_t a) const {
    if (a < arcs_) return a / n_;
    const std::size_t u = a - arcs_;
    return u < m_ ? u : root_;
  }
  std::size_t target_of(std::size_t a) const {
    if (a < arcs_) return m_ + a % n_;
    const std::size_t u = a - arcs_;
    return u < m_ ? root_ : u;
  }
  double arc_cost(std::size_t a) const {
    if (a < arcs_) return cost_[a];
    return a - arcs_ < m_ ? 0.0 : artificial_cost_;
  }
  double reduced_cost(std::size_t a) const {
    return cost_[a] + pi_[a / n_] - pi_[m_ + a % n_];
  }
  double threshold(std::size_t a) const {
    const double scale = std::max({std::abs(cost_[a]), std::abs(pi_[a / n_]),
                                   std::abs(pi_[m_ + a % n_]), 1.0});
    return -kOptimalityEps * scale;
  }

  // Block search over the original arcs in a fixed cyclic order.
  bool find_entering(std::size_t& entering) {
    if (arcs_ == 0) return false;
    double best = 0.0;
    std::size_t best_arc = arcs_;
    std::size_t a = next_arc_;
    std::size_t left = block_;
    for (std::size_t scanned = 0; scanned < arcs_; ++scanned) {
      if (!in_tree_[a]) {
        const double rc = reduced_cost(a);
        if (rc < best) {
          best = rc;
          best_arc = a;
        }
      }
      if (++a == arcs_) a = 0;
      if (--left == 0) {
        if (best_arc != arcs_ && best < threshold(best_arc)) {
          next_arc_ = a;
          entering = best_arc;
          return true;
        }
        left = block_;
      }
    }
    if (best_arc != arcs_ && best < threshold(best_arc)) {
      next_arc_ = a;
      entering = best_arc;
      return true;
    }
    return false;
  }

  // Cheapest incoming arc of every sink, pivoted in when improving.
  void initial_pivots() {
    for (std::size_t j = 0; j < n_; ++j) {
      std::size_t best = arcs_;
      double best_cost = kInf;
      for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t a = i * n_ + j;
        if (cost_[a] < best_cost) {
          best_cost = cost_[a];
          best = a;
        }
      }
      if (best != arcs_ && !in_tree_[best] && reduced_cost(best) < threshold(best)) pivot(best);
    }
  }

  void pivot(std::size_t entering) {
    const std::size_t s = source_of(entering);
    const std::size_t t = target_of(entering);

    std::size_t u = s, v = t;
    while (u != v) {
      if (depth_[u] > depth_[v]) {
        u = parent_[u];
      } else if (depth_[v] > depth_[u]) {
        v = parent_[v];
      } else {
        u = parent_[u];
        v = parent_[v];
      }
    }
    const std::size_t join = u;

    // Leaving arc: the last blocking arc in cycle order keeps the tree strongly feasible.
    double delta = kInf;
    std::size_t leaving_node = root_;
    int side = 0;
    for (std::size_t w = s; w != join; w = parent_[w]) {
      const double d = up_[w] ? flow_[pred_[w]] : kInf;
      if (d < delta) {
        delta = d;
        leaving_node = w;
        side = 1;
      }
    }
    for (std::size_t w = t; w != join; w = parent_[w]) {
      const double d = up_[w] ? kInf : flow_[pred_[w]];
      if (d <= delta) {
        delta = d;
        leaving_node = w;
        side = 2;
      }
    }
    if (side == 0 || delta == kInf) throw std::runtime_error("solve_transport: unbounded pivot");

    if (delta > 0.0) {
      flow_[entering] += delta;
      for (std::size_t w = s; w != join; w = parent_[w]) flow_[pred_[w]] += up_[w] ? -delta : delta;
      for (std::size_t w = t; w != join; w = parent_[w]) flow_[pred_[w]] += up_[w] ? delta : -delta;
    }
    const std::size_t leaving_arc = pred_[leaving_node];
    flow_[leaving_arc] = 0.0;
    in_tree_[entering] = 1;
    in_tree_[leaving_arc] = 0;

    const std::size_t u_in = side == 1 ? s : t;
    const std::size_t v_in = side == 1 ? t : s;
    reattach(leaving_node, u_in, v_in, entering);
  }

  static void erase_child(std::vector<std::size_t>& list, std::size_t child) {
    const auto it = std::find(list.begin(), list.end(), child);
    *it = list.back();
    list.pop_back();
  }

  // Cuts the subtree at `cut` off its parent, re-roots it at `u_in` and hangs
  // it below `v_in` through `entering`.
  void reattach(std::size_t cut, std::size_t u_in, std::size_t v_in, std::size_t entering) {
    erase_child(children_[parent_[cut]], cut);

    path_.clear();
    for (std::size_t w = u_in;; w = parent_[w]) {
      path_.push_back(w);
      if (w == cut) break;
    }
    for (std::size_t i = path_.size() - 1; i > 0; --i) {
      const std::size_t node = path_[i];
      const std::size_t child = path_[i - 1];
      parent_[node] = child;
      pred_[node] = pred_[child];
      up_[node] = !up_[child];
      erase_child(children_[node], child);
      children_[child].push_back(node);
    }

    parent_[u_in] = v_in;
    pred_[u_in] = entering;
    up_[u_in] = source_of(entering) == u_in ? 1 : 0;
    children_[v_in].push_back(u_in);

    const double c = arc_cost(entering);
    const double target_pi = up_[u_in] ? pi_[v_in] - c : pi_[v_in] + c;
    const double shift = target_pi - pi_[u_in];

    stack_.clear();
    stack_.push_back(u_in);
    while (!stack_.empty()) {
      const std::size_t w = stack_.back();
      stack_.pop_back();
      pi_[w] += shift;
      depth_[w] = depth_[parent_[w]] + 1;
      for (std::size_t ch : children_[w]) stack_.push_back(ch);
    }
    pi_[u_in] = target_pi;
  }

  std::size_t m_, n_, nodes_, root_, arcs_;
  std::span<const double> cost_;
  double artificial_cost_ = 0.0;
  std::vector<double> flow_;
  std::vector<char> in_tree_;
  std::vector<std::size_t> parent_, pred_;
  std::vector<char> up_;
  std::vector<std::size_t> depth_;
  std::vector<double> pi_;
  std::vector<std::vector<std::size_t>> children_;
  std::size_t next_arc_ = 0;
  std::size_t block_ = 10;
  std::vector<std::size_t> path_, stack_;
};

}  // namespace

TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              std::span<const double> cost) {
  if (supply.empty() || demand.empty()) {
    throw std::invalid_argument("solve_transport: empty supply or demand");
  }
  if (cost.size() != supply.size() * demand.size()) {
    throw std::invalid_argument("solve_transport: cost must be supply.size() x demand.size()");
  }
  for (double s : supply) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("solve_transport: bad supply");
  }
  for (double d : demand) {
    if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("solve_transport: bad demand");
  }
  for (double c : cost) {
    if (!std::isfinite(c)) throw std::invalid_argument("solve_transport: non-finite cost");
  }
  const double total_s = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double total_d = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(total_s - total_d) > kFeasibilityEps) {
    throw std::invalid_argument("solve_transport: supply and demand totals differ");
  }
  TransportSimplex solver(supply, demand, cost);
  return solver.run();
}

}  // namespace thmm
