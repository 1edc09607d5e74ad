#include "thmm/simulator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "thmm/rng.hpp"

namespace thmm {

namespace {

// Stream ids keep the draws of each random source independent of the others,
// so changing e.g. sigma_y never perturbs the latent path.
enum Stream : std::uint64_t {
  kInitial = 0,
  kDynamics = 1,
  kNoise = 2,
};

std::size_t draw_index(const double* probs, std::size_t count, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Skip trailing zero-probability states so rounding never selects them.
  std::size_t last = count - 1;
  while (last > 0 && probs[last] == 0.0) --last;
  return last;
}

void check_probability_vector(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) {
      throw std::invalid_argument(std::string(what) + ": negative or NaN entry");
    }
    sum += v[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string(what) + ": entries sum to " + std::to_string(sum));
  }
}

}  // namespace

void TimeSeries::validate() const {
  if (x && x->size() != y.size()) {
    throw std::invalid_argument("TimeSeries: latent and observed lengths differ");
  }
}

void CosineModelConfig::validate() const {
  if (!(sigma_x >= 0.0) || !(sigma_y >= 0.0)) {
    throw std::invalid_argument("CosineModelConfig: sigma_x and sigma_y must be >= 0");
  }
  if (n < 2) {
    throw std::invalid_argument("CosineModelConfig: n must be >= 2");
  }
}

void FiniteHmmTruth::validate() const {
  const auto r = static_cast<Eigen::Index>(support.size());
  if (r == 0) throw std::invalid_argument("FiniteHmmTruth: empty support");
  if (transition.rows() != r || transition.cols() != r) {
    throw std::invalid_argument("FiniteHmmTruth: transition must be r x r");
  }
  if (initial.size() != r) {
    throw std::invalid_argument("FiniteHmmTruth: initial must have length r");
  }
  for (Eigen::Index i = 0; i < r; ++i) {
    check_probability_vector(transition.row(i).transpose(), "FiniteHmmTruth transition row");
  }
  check_probability_vector(initial, "FiniteHmmTruth initial");
}

TimeSeries simulate_cosine(const CosineModelConfig& cfg) {
  cfg.validate();
  CounterRng init(cfg.seed, kInitial);
  CounterRng dyn(cfg.seed, kDynamics);
  CounterRng noise(cfg.seed, kNoise);

  TimeSeries out;
  out.y.resize(cfg.n);
  out.x.emplace(cfg.n);
  auto& x = *out.x;

  double z = 2.0 * std::numbers::pi * init.uniform();
  for (std::size_t k = 0; k < cfg.n; ++k) {
    if (cfg.sigma_x > 0.0) z += cfg.sigma_x * dyn.normal();
    x[k] = std::cos(z);
    out.y[k] = cfg.sigma_y > 0.0 ? x[k] + cfg.sigma_y * noise.normal() : x[k];
  }
  return out;
}

TimeSeries simulate_finite_hmm(const FiniteHmmTruth& truth, double noise_sigma,
                               std::size_t n, std::uint64_t seed) {
  truth.validate();
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("simulate_finite_hmm: noise_sigma must be >= 0");
  }
  if (n == 0) throw std::invalid_argument("simulate_finite_hmm: n must be positive");

  const std::size_t r = truth.states();
  // Row-major copy so row slices are contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> q = truth.transition;

  CounterRng init(seed, kInitial);
  CounterRng dyn(seed, kDynamics);
  CounterRng noise(seed, kNoise);

  TimeSeries out;
  out.y.resize(n);
  out.x.emplace(n);
  std::size_t state = draw_index(truth.initial.data(), r, init.uniform());
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) state = draw_index(q.row(static_cast<Eigen::Index>(state)).data(), r, dyn.uniform());
    const double xk = truth.support[state];
    (*out.x)[k] = xk;
    out.y[k] = noise_sigma > 0.0 ? xk + noise_sigma * noise.normal() : xk;
  }
  return out;
}

std::vector<PointPair> sample_cosine_pairs(double sigma_x, std::size_t count,
                                           std::uint64_t seed) {
  if (!(sigma_x >= 0.0)) throw std::invalid_argument("sample_cosine_pairs: sigma_x < 0");
  CounterRng init(seed, kInitial);
  CounterRng dyn(seed, kDynamics);
  std::vector<PointPair> pairs(count);
  for (auto& p : pairs) {
    const double z0 = 2.0 * std::numbers::pi * init.uniform();
    const double z1 = z0 + sigma_x * dyn.normal();
    p = {std::cos(z0), std::cos(z1)};
  }
  return pairs;
}

std::vector<PointPair> sample_finite_pairs(const FiniteHmmTruth& truth, std::size_t count,
                                           std::uint64_t seed) {
  truth.validate();
  const std::size_t r = truth.states();
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> q = truth.transition;
  CounterRng init(seed, kInitial);
  CounterRng dyn(seed, kDynamics);
  std::vector<PointPair> pairs(count);
  for (auto& p : pairs) {
    const std::size_t a = draw_index(truth.initial.data(), r, init.uniform());
    const std::size_t b = draw_index(q.row(static_cast<Eigen::Index>(a)).data(), r, dyn.uniform());
    p = {truth.support[a], truth.support[b]};
  }
  return pairs;
}

}  // namespace thmm
