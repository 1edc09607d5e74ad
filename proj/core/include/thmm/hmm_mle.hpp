#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "thmm/gaussian_mixture.hpp"
#include "thmm/measure.hpp"
#include "thmm/simulator.hpp"

namespace thmm {

/// Finite-support translation HMM: hidden chain on `support` with transition
/// matrix `transition`, observed through additive noise with density `noise`.
struct HmmParams {
  std::vector<double> support;
  Eigen::MatrixXd transition;
  GaussianMixture noise;

  std::size_t states() const noexcept { return support.size(); }

  /// Support strictly increasing, transition row-stochastic with entries
  /// in [floor_q, 1], noise valid with stds >= s_floor.
  void validate(double floor_q = 0.0, double s_floor = 0.0) const;

  /// (x + m, mu - m): the translation that leaves the observation law unchanged.
  HmmParams translated(double m) const;
};

/// Raised when a forward normalizer vanishes or Q has no unique stationary law.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stationary row vector of a row-stochastic matrix, from a direct linear
/// solve polished by lazy power iterations. Throws NumericalFailure when the
/// stationary law is not unique or the residual stays above 1e-12.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

/// Exact log-likelihood with the chain started from its stationary law
/// (scaled forward recursion in the log domain).
double log_likelihood(const HmmParams& params, std::span<const double> y);

struct Posteriors {
  /// n x r, row k holds P(Z_k = z | Y_1..Y_n).
  Eigen::MatrixXd state;
  /// n - 1 matrices, entry (z, z') = P(Z_k = z, Z_{k+1} = z' | Y); empty unless requested.
  std::vector<Eigen::MatrixXd> pairwise;
  /// Sum over k of the pairwise posteriors.
  Eigen::MatrixXd pairwise_sum;
  double loglik = 0.0;
};

Posteriors forward_backward(const HmmParams& params, std::span<const double> y,
                            bool keep_pairwise = true);

struct EmConfig {
  std::size_t max_iters = 500;
  /// Stop when |l_new - l_old| / |l_old| falls below this.
  double tol = 1e-7;
  std::size_t n_starts = 3;
  std::uint64_t seed = 0;
  bool update_support = false;
  /// Transition floor; negative selects 1e-6 / r.
  double floor_q = -1.0;
  double s_floor = 1e-3;

  double transition_floor(std::size_t r) const noexcept {
    return floor_q < 0.0 ? 1e-6 / static_cast<double>(r) : floor_q;
  }
};

/// One EM (ECM when the support is updated) iteration followed by recentering
/// of the noise. The log-likelihood never decreases.
HmmParams em_step(const HmmParams& params, std::span<const double> y, const EmConfig& cfg);

/// Deterministic starting point for start index `start`: frozen uniform
/// support grid over the data range shrunk by a robust noise-scale estimate,
/// jittered uniform Q, symmetric mixture.
HmmParams initial_params(std::span<const double> y, std::size_t r, std::size_t components,
                         std::uint64_t seed, const EmConfig& cfg = {});

/// Robust noise scale from the median absolute first difference.
double noise_scale_estimate(std::span<const double> y);

enum class PenaltyForm { Simple, LogLog, SlopeHeuristic };

struct PenaltySpec {
  PenaltyForm form = PenaltyForm::Simple;
  /// Multiplier for the "appendix" (log-log) and slope-heuristic forms; unused by "paper-simple".
  double constant = 1.0;
};

/// Complexity penalty subtracted from (1/n) l_n:
///   paper-simple:    (D + r^2) (log n)^15 / n
///   appendix:        c (dim_D + r + r^2 - 1) (log n)^14 log log n / n
///   slope-heuristic: c (dim_D + r + r^2 - 1) / n
/// Throws std::invalid_argument for n < 3.
double penalty(std::size_t n, std::size_t r, std::size_t components, std::size_t dim_noise,
               const PenaltySpec& spec);

struct FitReport {
  HmmParams params;
  double loglik = 0.0;
  double penalized = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t n = 0;
  std::size_t start = 0;
};

/// Best of cfg.n_starts EM runs; `penalized` uses `pen`.
FitReport fit_mle(std::span<const double> y, std::size_t r, std::size_t components,
                  const EmConfig& cfg, const PenaltySpec& pen = {});

/// Discrete law of (X_1, X_2) under the fitted chain: atoms (x_z, x_z') with
/// weights mu_Q(z) Q(z, z').
DiscreteMeasure2D pair_law(const HmmParams& params);

}  // namespace thmm
