#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thmm/simulator.hpp"

namespace thmm {

using Complex = std::complex<double>;

/**
 * Piecewise-constant probability measure on an r x r uniform partition of
 * (-1, 1)^2, optionally translated by (shift, shift).
 *
 * p is row-major: p[i * r + j] is the probability of the cell
 * [edge(i), edge(i+1)) x [edge(j), edge(j+1)), i indexing the first coordinate.
 */
struct GridDensity2D {
  std::size_t r = 1;
  std::vector<double> p{1.0};
  double shift = 0.0;

  static GridDensity2D uniform(std::size_t r);

  double edge(std::size_t i) const noexcept {
    return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(r) + shift;
  }
  double prob(std::size_t i, std::size_t j) const noexcept { return p[i * r + j]; }

  /// Same cell probabilities, support moved by (m, m).
  GridDensity2D translated(double m) const;
  /// Probabilities of the first coordinate's cells (row sums).
  std::vector<double> marginal_first() const;
  /// Cell index of a coordinate; the right-most edge belongs to the last cell.
  /// Throws std::out_of_range outside [edge(0), edge(r)].
  std::size_t cell_of(double v) const;

  void validate() const;
};

/// Characteristic function of Uniform(a, b). Switches to a Taylor expansion
/// when |t| (b - a) < 1e-4.
Complex cell_charfn(double a, double b, double t);

/// Phi_R(t1, t2) = sum_ij p_ij cell(i)(t1) cell(j)(t2).
Complex grid_charfn(const GridDensity2D& density, double t1, double t2);

/**
 * Empirical characteristic function of consecutive observation pairs,
 *   (1/n) sum_{j=1}^{n-1} exp(i (t1 Y_j + t2 Y_{j+1})).
 * The 1/n factor over n-1 summands is intentional.
 */
class EmpCharFn {
 public:
  explicit EmpCharFn(std::vector<double> y);
  explicit EmpCharFn(const TimeSeries& series) : EmpCharFn(series.y) {}

  Complex operator()(double t1, double t2) const;

  std::size_t size() const noexcept { return y_.size(); }
  std::span<const double> observations() const noexcept { return y_; }

 private:
  std::vector<double> y_;
};

Complex emp_charfn(const TimeSeries& series, double t1, double t2);

/// Monte-Carlo nodes (U1, U2) with i.i.d. N(0, sigma_w^2) coordinates,
/// drawn once per fit and reused for every criterion evaluation.
struct WeightNodes {
  std::vector<std::array<double, 2>> nodes;
  double sigma_w = 3.0;
  std::uint64_t seed = 0;

  static constexpr std::size_t kDefaultCount = 5000;
  static constexpr double kDefaultSigma = 3.0;

  static WeightNodes draw(std::uint64_t seed, std::size_t count = kDefaultCount,
                          double sigma_w = kDefaultSigma);
  std::size_t size() const noexcept { return nodes.size(); }
};

/// Any joint characteristic function on R^2; lets tests substitute Phi_R for Phi_hat.
using CharFn2D = std::function<Complex(double, double)>;

/**
 * Monte-Carlo least-squares contrast
 *   (1/N) sum_l | Phi_hat(U) Phi_R(U1,0) Phi_R(0,U2) - Phi_R(U) Phi_hat(U1,0) Phi_hat(0,U2) |^2.
 * Uncached: Phi_hat is evaluated at every node on each call.
 */
double mn_criterion(const EmpCharFn& phi_hat, const GridDensity2D& density,
                    const WeightNodes& nodes);
double mn_criterion(const CharFn2D& target, const GridDensity2D& density,
                    const WeightNodes& nodes);

/**
 * Node-cached criterion for a fixed grid geometry (r, shift).
 *
 * Phi_hat at the nodes and the per-node cell characteristic functions are
 * computed once; each evaluation is then two r x r by r x N products.
 * Results agree bit-for-bit with the uncached mn_criterion.
 * Evaluation is const and thread-safe.
 */
class MnCriterion {
 public:
  MnCriterion(const EmpCharFn& phi_hat, WeightNodes nodes, std::size_t r, double shift = 0.0);

  double operator()(const GridDensity2D& density) const;

  std::size_t order() const noexcept { return r_; }
  const WeightNodes& nodes() const noexcept { return nodes_; }

  /// Phi_hat at the nodes: joint, first marginal, second marginal.
  struct NodeValues {
    std::vector<Complex> joint, first, second;
  };
  const NodeValues& cached_values() const noexcept { return target_; }

 private:
  WeightNodes nodes_;
  std::size_t r_;
  double shift_;
  NodeValues target_;
  Eigen::MatrixXd a_re_, a_im_, b_re_, b_im_;
};

}  // namespace thmm
