#pragma once

#include <cstddef>
#include <vector>

namespace thmm {

/// Centered finite Gaussian location-scale mixture: sum_d p_d N(mu_d, s_d^2)
/// with sum_d p_d mu_d = 0.
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;

  static GaussianMixture single(double sd);

  std::size_t components() const noexcept { return weights.size(); }
  double center() const noexcept;
  double log_density(double u) const noexcept;
  double density(double u) const noexcept;
  /// Standard deviation of the mixture law.
  double total_std() const noexcept;

  /// Checks shape, weight normalization (1e-12), stds >= s_floor > 0
  /// and centering (1e-10).
  void validate(double s_floor = 0.0) const;
};

/// Free parameters of a centered D-component mixture on the real line:
/// (D - 1) weights, D means minus one centering constraint, D scales.
constexpr std::size_t mixture_dimension(std::size_t components) noexcept {
  return components == 0 ? 0 : 3 * components - 2;
}

}  // namespace thmm
