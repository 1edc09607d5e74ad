#include "thmm/gaussian_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace thmm {

namespace {
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

GaussianMixture GaussianMixture::single(double sd) {
  return GaussianMixture{{1.0}, {0.0}, {sd}};
}

double GaussianMixture::center() const noexcept {
  double m = 0.0;
  for (std::size_t d = 0; d < weights.size(); ++d) m += weights[d] * means[d];
  return m;
}

double GaussianMixture::log_density(double u) const noexcept {
  auto term = [&](std::size_t d) {
    const double z = (u - means[d]) / stds[d];
    return std::log(weights[d]) - std::log(stds[d]) - kLogSqrt2Pi - 0.5 * z * z;
  };
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < weights.size(); ++d) top = std::max(top, term(d));
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (std::size_t d = 0; d < weights.size(); ++d) acc += std::exp(term(d) - top);
  return top + std::log(acc);
}

double GaussianMixture::density(double u) const noexcept { return std::exp(log_density(u)); }

double GaussianMixture::total_std() const noexcept {
  const double m = center();
  double second = 0.0;
  for (std::size_t d = 0; d < weights.size(); ++d) {
    second += weights[d] * (stds[d] * stds[d] + means[d] * means[d]);
  }
  return std::sqrt(std::max(0.0, second - m * m));
}

void GaussianMixture::validate(double s_floor) const {
  const std::size_t count = weights.size();
  if (count == 0) throw std::invalid_argument("GaussianMixture: no components");
  if (means.size() != count || stds.size() != count) {
    throw std::invalid_argument("GaussianMixture: weights, means and stds differ in length");
  }
  double sum = 0.0;
  for (std::size_t d = 0; d < count; ++d) {
    if (!(weights[d] >= 0.0)) throw std::invalid_argument("GaussianMixture: negative weight");
    if (!std::isfinite(means[d])) throw std::invalid_argument("GaussianMixture: non-finite mean");
    if (!(stds[d] > 0.0) || stds[d] < s_floor || !std::isfinite(stds[d])) {
      throw std::invalid_argument("GaussianMixture: std below floor");
    }
    sum += weights[d];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("GaussianMixture: weights sum to " + std::to_string(sum));
  }
  if (std::abs(center()) > 1e-10) {
    throw std::invalid_argument("GaussianMixture: not centered (mean " + std::to_string(center()) +
                                ")");
  }
}

}  // namespace thmm
