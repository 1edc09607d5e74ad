#include "thmm/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace thmm {

namespace {

constexpr double kNormTol = 1e-12;

void check_normalized(const std::vector<double>& w, const char* what) {
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": negative or non-finite weight");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kNormTol) {
    throw std::invalid_argument(std::string(what) + ": weights sum to " + std::to_string(total));
  }
}

}  // namespace

DiscreteMeasure2D DiscreteMeasure2D::empirical(std::vector<Point2> samples) {
  if (samples.empty()) throw std::invalid_argument("DiscreteMeasure2D::empirical: no samples");
  DiscreteMeasure2D m;
  const double w = 1.0 / static_cast<double>(samples.size());
  m.weights.assign(samples.size(), w);
  m.points = std::move(samples);
  return m;
}

void DiscreteMeasure2D::validate() const {
  if (points.size() != weights.size()) {
    throw std::invalid_argument("DiscreteMeasure2D: points and weights differ in length");
  }
  if (points.empty()) throw std::invalid_argument("DiscreteMeasure2D: empty measure");
  for (const auto& p : points) {
    if (std::isnan(p[0]) || std::isnan(p[1])) {
      throw std::invalid_argument("DiscreteMeasure2D: NaN coordinate");
    }
  }
  check_normalized(weights, "DiscreteMeasure2D");
}

DiscreteMeasure2D DiscreteMeasure2D::merged() const {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return points[i] < points[j]; });
  DiscreteMeasure2D out;
  for (std::size_t i : order) {
    if (weights[i] == 0.0) continue;
    if (!out.points.empty() && out.points.back() == points[i]) {
      out.weights.back() += weights[i];
    } else {
      out.points.push_back(points[i]);
      out.weights.push_back(weights[i]);
    }
  }
  return out;
}

DiscreteMeasure2D DiscreteMeasure2D::translated(double dx, double dy) const {
  DiscreteMeasure2D out = *this;
  for (auto& p : out.points) {
    p[0] += dx;
    p[1] += dy;
  }
  return out;
}

double w1_1d(const DiscreteMeasure1D& a, const DiscreteMeasure1D& b) {
  if (a.points.size() != a.weights.size() || b.points.size() != b.weights.size()) {
    throw std::invalid_argument("w1_1d: points and weights differ in length");
  }
  check_normalized(a.weights, "w1_1d");
  check_normalized(b.weights, "w1_1d");

  // Signed atoms (x, +w for a, -w for b) swept in order; the running sum is F_a - F_b.
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(a.points.size() + b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) atoms.emplace_back(a.points[i], a.weights[i]);
  for (std::size_t i = 0; i < b.points.size(); ++i) atoms.emplace_back(b.points[i], -b.weights[i]);
  for (const auto& [x, w] : atoms) {
    if (!std::isfinite(x)) throw std::invalid_argument("w1_1d: non-finite point");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });

  double cdf_gap = 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    cdf_gap += atoms[i].second;
    area += std::abs(cdf_gap) * (atoms[i + 1].first - atoms[i].first);
  }
  return area;
}

W1Result w1_2d(const DiscreteMeasure2D& a, const DiscreteMeasure2D& b, const W1Options& opts) {
  a.validate();
  b.validate();
  W1Result out;
  out.source = a.merged();
  out.target = b.merged();
  const std::size_t m = out.source.size();
  const std::size_t n = out.target.size();
  if (m != 0 && n > opts.max_arcs / m) {
    throw std::length_error("w1_2d: " + std::to_string(m) + " x " + std::to_string(n) +
                            " exceeds max_arcs " + std::to_string(opts.max_arcs));
  }

  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& p = out.source.points[i];
    for (std::size_t j = 0; j < n; ++j) {
      const Point2& q = out.target.points[j];
      cost[i * n + j] = std::hypot(p[0] - q[0], p[1] - q[1]);
    }
  }
  // Rescale the target so totals agree to rounding before the exact solve.
  std::vector<double> demand = out.target.weights;
  const double sa = std::accumulate(out.source.weights.begin(), out.source.weights.end(), 0.0);
  const double sb = std::accumulate(demand.begin(), demand.end(), 0.0);
  for (double& d : demand) d *= sa / sb;

  out.plan = solve_transport(out.source.weights, demand, cost);
  out.value = out.plan.objective;
  return out;
}

}  // namespace thmm
