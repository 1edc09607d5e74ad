#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace thmm {

/// Observed sequence Y_1..Y_n, optionally with the latent X_1..X_n.
struct TimeSeries {
  std::vector<double> y;
  std::optional<std::vector<double>> x;

  std::size_t size() const noexcept { return y.size(); }
  bool has_latent() const noexcept { return x.has_value(); }
  /// Throws std::invalid_argument when the latent length disagrees with y.
  void validate() const;
};

/// Parameters of the cosine random-walk chain
///   Z_k = Z_{k-1} + sigma_x * eta_k,  X_k = cos(Z_k),  Y_k = X_k + sigma_y * eps_k
/// with Z_0 ~ Uniform(0, 2 pi).
struct CosineModelConfig {
  double sigma_x = 0.1;
  double sigma_y = 0.1;
  std::size_t n = 5000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Finite-support hidden chain used as ground truth in tests and model selection.
struct FiniteHmmTruth {
  std::vector<double> support;
  Eigen::MatrixXd transition;
  Eigen::VectorXd initial;

  std::size_t states() const noexcept { return support.size(); }
  void validate() const;
};

using PointPair = std::array<double, 2>;

TimeSeries simulate_cosine(const CosineModelConfig& cfg);

TimeSeries simulate_finite_hmm(const FiniteHmmTruth& truth, double noise_sigma,
                               std::size_t n, std::uint64_t seed);

/// Draws `count` i.i.d. pairs (X_1, X_2) from the stationary cosine chain:
/// (cos Z, cos(Z + sigma_x * eta)) with Z uniform on (0, 2 pi).
std::vector<PointPair> sample_cosine_pairs(double sigma_x, std::size_t count,
                                           std::uint64_t seed);

/// Draws `count` i.i.d. pairs (X_1, X_2) with X_1 ~ initial and X_2 | X_1 ~ transition row.
std::vector<PointPair> sample_finite_pairs(const FiniteHmmTruth& truth, std::size_t count,
                                           std::uint64_t seed);

}  // namespace thmm
