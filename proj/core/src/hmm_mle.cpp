#include "thmm/hmm_mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/LU>

#include "thmm/rng.hpp"

namespace thmm {

namespace {

const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-component constants of the noise mixture.
struct MixtureTerms {
  std::vector<double> offset, mean, inv_std;

  explicit MixtureTerms(const GaussianMixture& g) {
    const std::size_t count = g.components();
    offset.resize(count);
    mean = g.means;
    inv_std.resize(count);
    for (std::size_t d = 0; d < count; ++d) {
      offset[d] = std::log(g.weights[d]) - std::log(g.stds[d]) - kLogSqrt2Pi;
      inv_std[d] = 1.0 / g.stds[d];
    }
  }

  // Fills per-component log terms into `out` and returns their log-sum-exp.
  double log_terms(double u, double* out) const {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < offset.size(); ++d) {
      const double z = (u - mean[d]) * inv_std[d];
      out[d] = offset[d] - 0.5 * z * z;
      top = std::max(top, out[d]);
    }
    if (!std::isfinite(top)) return top;
    double acc = 0.0;
    for (std::size_t d = 0; d < offset.size(); ++d) acc += std::exp(out[d] - top);
    return top + std::log(acc);
  }
};

void check_observations(std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("observations must be nonempty");
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("observations must be finite");
  }
}

// Scaled emissions e(k, z) = exp(log gamma(y_k - x_z) - shift_k).
struct Emissions {
  RowMatrix scaled;
  std::vector<double> shift;
};

Emissions compute_emissions(const HmmParams& params, std::span<const double> y) {
  const std::size_t n = y.size();
  const std::size_t r = params.states();
  const MixtureTerms terms(params.noise);
  std::vector<double> scratch(params.noise.components());
  Emissions em{RowMatrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r)),
               std::vector<double>(n)};
  std::vector<double> logs(r);
  for (std::size_t k = 0; k < n; ++k) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < r; ++z) {
      logs[z] = terms.log_terms(y[k] - params.support[z], scratch.data());
      top = std::max(top, logs[z]);
    }
    if (!std::isfinite(top)) {
      throw NumericalFailure("emission densities vanish at index " + std::to_string(k));
    }
    em.shift[k] = top;
    for (std::size_t z = 0; z < r; ++z) {
      em.scaled(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(z)) = std::exp(logs[z] - top);
    }
  }
  return em;
}

// Scaled forward pass. Returns filtered probabilities (n x r) and normalizers.
struct Forward {
  RowMatrix alpha;
  std::vector<double> norm;
  double loglik = 0.0;
};

Forward run_forward(const RowMatrix& q, const Eigen::VectorXd& init, const Emissions& em) {
  const auto n = em.scaled.rows();
  const auto r = em.scaled.cols();
  Forward f{RowMatrix(n, r), std::vector<double>(static_cast<std::size_t>(n)), 0.0};
  for (Eigen::Index k = 0; k < n; ++k) {
    double total = 0.0;
    for (Eigen::Index z = 0; z < r; ++z) {
      double pred;
      if (k == 0) {
        pred = init[z];
      } else {
        pred = 0.0;
        for (Eigen::Index w = 0; w < r; ++w) pred += f.alpha(k - 1, w) * q(w, z);
      }
      const double a = pred * em.scaled(k, z);
      f.alpha(k, z) = a;
      total += a;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw NumericalFailure("forward normalizer vanished at index " + std::to_string(k));
    }
    for (Eigen::Index z = 0; z < r; ++z) f.alpha(k, z) /= total;
    f.norm[static_cast<std::size_t>(k)] = total;
    f.loglik += std::log(total) + em.shift[static_cast<std::size_t>(k)];
  }
  return f;
}

// Projects a probability row onto {q >= floor, sum = 1} by clamping small
// entries and rescaling the rest.
void apply_floor(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double floor) {
  if (floor <= 0.0) return;
  const auto r = row.size();
  std::vector<bool> clamped(static_cast<std::size_t>(r), false);
  for (int pass = 0; pass < 64; ++pass) {
    bool changed = false;
    double free_mass = 0.0;
    Eigen::Index fixed = 0;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (!clamped[static_cast<std::size_t>(j)] && row[j] < floor) {
        clamped[static_cast<std::size_t>(j)] = true;
        changed = true;
      }
      if (clamped[static_cast<std::size_t>(j)]) {
        ++fixed;
      } else {
        free_mass += row[j];
      }
    }
    const double target = 1.0 - floor * static_cast<double>(fixed);
    for (Eigen::Index j = 0; j < r; ++j) {
      if (clamped[static_cast<std::size_t>(j)]) {
        row[j] = floor;
      } else if (free_mass > 0.0) {
        row[j] *= target / free_mass;
      }
    }
    if (!changed) break;
  }
}

// Part of the EM auxiliary function that depends on Q, including the
// stationary initial law.
double transition_objective(const Eigen::MatrixXd& q, const Eigen::MatrixXd& pair_sum,
                            const Eigen::RowVectorXd& first_state) {
  double value = 0.0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (pair_sum(i, j) > 0.0) value += pair_sum(i, j) * std::log(q(i, j));
    }
  }
  const Eigen::VectorXd mu = stationary_distribution(q);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    if (first_state[i] > 0.0) value += first_state[i] * std::log(mu[i]);
  }
  return value;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  double b = a;
  if (hi != lo) b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

}  // namespace

void HmmParams::validate(double floor_q, double s_floor) const {
  const auto r = static_cast<Eigen::Index>(support.size());
  if (r == 0) throw std::invalid_argument("HmmParams: empty support");
  for (Eigen::Index z = 0; z < r; ++z) {
    if (!std::isfinite(support[static_cast<std::size_t>(z)])) {
      throw std::invalid_argument("HmmParams: non-finite support point");
    }
    if (z > 0 && !(support[static_cast<std::size_t>(z)] > support[static_cast<std::size_t>(z - 1)])) {
      throw std::invalid_argument("HmmParams: support must be strictly increasing");
    }
  }
  if (transition.rows() != r || transition.cols() != r) {
    throw std::invalid_argument("HmmParams: transition must be r x r");
  }
  for (Eigen::Index i = 0; i < r; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < r; ++j) {
      const double v = transition(i, j);
      if (!(v >= floor_q * (1.0 - 1e-9)) || v > 1.0) {
        throw std::invalid_argument("HmmParams: transition entry outside [floor_q, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("HmmParams: transition rows must sum to 1");
    }
  }
  noise.validate(s_floor);
}

HmmParams HmmParams::translated(double m) const {
  HmmParams out = *this;
  for (double& x : out.support) x += m;
  for (double& mu : out.noise.means) mu -= m;
  return out;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  const auto r = transition.rows();
  if (r == 0 || transition.cols() != r) {
    throw std::invalid_argument("stationary_distribution: need a square matrix");
  }
  const Eigen::MatrixXd generator = Eigen::MatrixXd::Identity(r, r) - transition;
  Eigen::FullPivLU<Eigen::MatrixXd> rank_check(generator);
  rank_check.setThreshold(1e-10);
  if (rank_check.rank() != r - 1) {
    throw NumericalFailure("transition matrix has no unique stationary distribution");
  }

  Eigen::MatrixXd system = generator.transpose();
  system.row(r - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r);
  rhs[r - 1] = 1.0;
  Eigen::VectorXd mu = system.fullPivLu().solve(rhs);
  mu = mu.cwiseMax(0.0);
  mu /= mu.sum();

  // Lazy power iteration: same fixed point, converges for periodic chains too.
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd next = transition.transpose() * mu;
    if ((next - mu).cwiseAbs().maxCoeff() <= 1e-13) break;
    mu = 0.5 * (mu + next);
    mu /= mu.sum();
  }
  const double residual = (transition.transpose() * mu - mu).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-12)) {
    throw NumericalFailure("stationary distribution did not converge (residual " +
                           std::to_string(residual) + ")");
  }
  return mu;
}

double log_likelihood(const HmmParams& params, std::span<const double> y) {
  check_observations(y);
  const std::size_t r = params.states();
  if (r == 0 || params.transition.rows() != static_cast<Eigen::Index>(r)) {
    throw std::invalid_argument("log_likelihood: malformed parameters");
  }
  const RowMatrix q = params.transition;
  const Eigen::VectorXd init = stationary_distribution(params.transition);
  const MixtureTerms terms(params.noise);
  std::vector<double> scratch(params.noise.components());
  std::vector<double> logs(r), alpha(r), next(r);

  double loglik = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < r; ++z) {
      logs[z] = terms.log_terms(y[k] - params.support[z], scratch.data());
      top = std::max(top, logs[z]);
    }
    if (!std::isfinite(top)) {
      throw NumericalFailure("emission densities vanish at index " + std::to_string(k));
    }
    double total = 0.0;
    for (std::size_t z = 0; z < r; ++z) {
      double pred;
      if (k == 0) {
        pred = init[static_cast<Eigen::Index>(z)];
      } else {
        pred = 0.0;
        for (std::size_t w = 0; w < r; ++w) {
          pred += alpha[w] * q(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(z));
        }
      }
      next[z] = pred * std::exp(logs[z] - top);
      total += next[z];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw NumericalFailure("forward normalizer vanished at index " + std::to_string(k));
    }
    for (std::size_t z = 0; z < r; ++z) alpha[z] = next[z] / total;
    loglik += std::log(total) + top;
  }
  return loglik;
}

Posteriors forward_backward(const HmmParams& params, std::span<const double> y,
                            bool keep_pairwise) {
  check_observations(y);
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto r = static_cast<Eigen::Index>(params.states());
  const RowMatrix q = params.transition;
  const Emissions em = compute_emissions(params, y);
  const Forward fwd = run_forward(q, stationary_distribution(params.transition), em);

  Posteriors post;
  post.loglik = fwd.loglik;
  post.state.resize(n, r);
  post.pairwise_sum = Eigen::MatrixXd::Zero(r, r);
  if (keep_pairwise) post.pairwise.reserve(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)));

  Eigen::VectorXd beta = Eigen::VectorXd::Ones(r);
  Eigen::VectorXd weighted(r);
  std::vector<Eigen::MatrixXd> pairs_reversed;
  Eigen::MatrixXd xi(r, r);

  for (Eigen::Index k = n - 1; k >= 0; --k) {
    double total = 0.0;
    for (Eigen::Index z = 0; z < r; ++z) {
      post.state(k, z) = fwd.alpha(k, z) * beta[z];
      total += post.state(k, z);
    }
    post.state.row(k) /= total;
    if (k == 0) break;

    // Pairwise posterior of (Z_{k-1}, Z_k), then beta_{k-1}.
    const double c = fwd.norm[static_cast<std::size_t>(k)];
    for (Eigen::Index z = 0; z < r; ++z) weighted[z] = em.scaled(k, z) * beta[z] / c;
    double pair_total = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < r; ++j) {
        xi(i, j) = fwd.alpha(k - 1, i) * q(i, j) * weighted[j];
        pair_total += xi(i, j);
      }
    }
    xi /= pair_total;
    post.pairwise_sum += xi;
    if (keep_pairwise) pairs_reversed.push_back(xi);

    Eigen::VectorXd prev(r);
    for (Eigen::Index i = 0; i < r; ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < r; ++j) acc += q(i, j) * weighted[j];
      prev[i] = acc;
    }
    beta = prev;
  }
  if (keep_pairwise) {
    post.pairwise.assign(std::make_move_iterator(pairs_reversed.rbegin()),
                         std::make_move_iterator(pairs_reversed.rend()));
  }
  return post;
}

HmmParams em_step(const HmmParams& params, std::span<const double> y, const EmConfig& cfg) {
  const std::size_t n = y.size();
  const std::size_t r = params.states();
  const std::size_t count = params.noise.components();
  const Posteriors post = forward_backward(params, y, false);

  // Joint responsibilities over (state, component).
  const MixtureTerms terms(params.noise);
  std::vector<double> resp(n * r * count);
  std::vector<double> scratch(count);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t z = 0; z < r; ++z) {
      const double u = y[k] - params.support[z];
      const double log_total = terms.log_terms(u, scratch.data());
      const double occupancy = post.state(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(z));
      double* out = &resp[(k * r + z) * count];
      for (std::size_t d = 0; d < count; ++d) out[d] = occupancy * std::exp(scratch[d] - log_total);
    }
  }

  HmmParams next = params;
  GaussianMixture& g = next.noise;

  std::vector<double> mass(count, 0.0), first(count, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t z = 0; z < r; ++z) {
      const double u = y[k] - params.support[z];
      const double* w = &resp[(k * r + z) * count];
      for (std::size_t d = 0; d < count; ++d) {
        mass[d] += w[d];
        first[d] += w[d] * u;
      }
    }
  }
  const double total_mass = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (std::size_t d = 0; d < count; ++d) {
    if (mass[d] > 0.0) g.means[d] = first[d] / mass[d];
    g.weights[d] = mass[d] / total_mass;
  }

  if (cfg.update_support) {
    for (std::size_t z = 0; z < r; ++z) {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double* w = &resp[(k * r + z) * count];
        for (std::size_t d = 0; d < count; ++d) {
          const double prec = 1.0 / (params.noise.stds[d] * params.noise.stds[d]);
          num += w[d] * prec * (y[k] - g.means[d]);
          den += w[d] * prec;
        }
      }
      if (den > 0.0) next.support[z] = num / den;
    }
  }

  std::vector<double> second(count, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t z = 0; z < r; ++z) {
      const double* w = &resp[(k * r + z) * count];
      for (std::size_t d = 0; d < count; ++d) {
        const double e = y[k] - next.support[z] - g.means[d];
        second[d] += w[d] * e * e;
      }
    }
  }
  for (std::size_t d = 0; d < count; ++d) {
    if (mass[d] > 0.0) g.stds[d] = std::max(std::sqrt(second[d] / mass[d]), cfg.s_floor);
  }

  // Transition update with a backtracking guard on the stationary-start term,
  // which the closed form ignores.
  const double floor_q = cfg.transition_floor(r);
  Eigen::MatrixXd candidate = params.transition;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(r); ++i) {
    const double row_sum = post.pairwise_sum.row(i).sum();
    if (row_sum > 0.0) {
      candidate.row(i) = post.pairwise_sum.row(i) / row_sum;
      apply_floor(candidate.row(i), floor_q);
    }
  }
  const Eigen::RowVectorXd first_state = post.state.row(0);
  const double base = transition_objective(params.transition, post.pairwise_sum, first_state);
  next.transition = params.transition;
  for (double step = 1.0; step > 1.0 / 2048.0; step *= 0.5) {
    const Eigen::MatrixXd trial =
        step == 1.0 ? candidate : Eigen::MatrixXd(params.transition + step * (candidate - params.transition));
    try {
      if (transition_objective(trial, post.pairwise_sum, first_state) >= base) {
        next.transition = trial;
        break;
      }
    } catch (const NumericalFailure&) {
      // Candidate without a unique stationary law: shrink toward the current Q.
    }
  }

  // Keep the noise centered; the support absorbs the shift.
  const double m = g.center();
  for (double& mu : g.means) mu -= m;
  for (double& x : next.support) x += m;

  if (cfg.update_support) {
    std::vector<std::size_t> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return next.support[a] < next.support[b]; });
    if (!std::is_sorted(order.begin(), order.end())) {
      HmmParams sorted = next;
      for (std::size_t a = 0; a < r; ++a) {
        sorted.support[a] = next.support[order[a]];
        for (std::size_t b = 0; b < r; ++b) {
          sorted.transition(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              next.transition(static_cast<Eigen::Index>(order[a]), static_cast<Eigen::Index>(order[b]));
        }
      }
      next = std::move(sorted);
    }
  }
  return next;
}

double noise_scale_estimate(std::span<const double> y) {
  if (y.size() < 2) return 0.0;
  std::vector<double> diffs(y.size() - 1);
  for (std::size_t k = 0; k + 1 < y.size(); ++k) diffs[k] = std::abs(y[k + 1] - y[k]);
  // |e_{k+1} - e_k| has median 0.6745 sqrt(2) sigma under Gaussian noise.
  const double from_diffs = quantile(std::move(diffs), 0.5) / (0.6744897501960817 * std::numbers::sqrt2);
  std::vector<double> values(y.begin(), y.end());
  const double iqr = quantile(values, 0.75) - quantile(values, 0.25);
  return std::min(from_diffs, iqr / 1.3489795003921634);
}

HmmParams initial_params(std::span<const double> y, std::size_t r, std::size_t components,
                         std::uint64_t seed, const EmConfig& cfg) {
  check_observations(y);
  if (r == 0 || components == 0) throw std::invalid_argument("initial_params: r and D must be >= 1");
  const double scale = std::max(noise_scale_estimate(y), cfg.s_floor);
  std::vector<double> values(y.begin(), y.end());

  HmmParams p;
  p.support.resize(r);
  if (r == 1) {
    p.support[0] = quantile(values, 0.5);
  } else {
    double lo = quantile(values, 0.005) + 1.5 * scale;
    double hi = quantile(values, 0.995) - 1.5 * scale;
    if (!(hi > lo)) {
      lo = quantile(values, 0.25);
      hi = quantile(values, 0.75);
    }
    if (!(hi > lo)) {
      lo = values.front() - 0.5;
      hi = lo + 1.0;
    }
    for (std::size_t z = 0; z < r; ++z) {
      p.support[z] = lo + (hi - lo) * static_cast<double>(z) / static_cast<double>(r - 1);
    }
  }

  CounterRng rng(seed, 0x51ULL);
  p.transition.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < p.transition.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.transition.cols(); ++j) p.transition(i, j) = 1.0 + 0.1 * rng.uniform();
    p.transition.row(i) /= p.transition.row(i).sum();
    apply_floor(p.transition.row(i), cfg.transition_floor(r));
  }

  p.noise.weights.assign(components, 1.0 / static_cast<double>(components));
  p.noise.stds.assign(components, scale);
  p.noise.means.resize(components);
  for (std::size_t d = 0; d < components; ++d) {
    p.noise.means[d] =
        components == 1 ? 0.0
                        : scale * (-1.0 + 2.0 * static_cast<double>(d) / static_cast<double>(components - 1));
  }
  const double m = p.noise.center();
  for (double& mu : p.noise.means) mu -= m;
  return p;
}

FitReport fit_mle(std::span<const double> y, std::size_t r, std::size_t components,
                  const EmConfig& cfg, const PenaltySpec& pen) {
  check_observations(y);
  if (r == 0 || components == 0) throw std::invalid_argument("fit_mle: r and D must be >= 1");
  const std::size_t starts = std::max<std::size_t>(cfg.n_starts, 1);

  FitReport best;
  bool have_best = false;
  for (std::size_t s = 0; s < starts; ++s) {
    try {
      HmmParams params = initial_params(y, r, components, cfg.seed + s, cfg);
      double previous = log_likelihood(params, y);
      std::size_t iterations = 0;
      bool converged = false;
      double current = previous;
      while (iterations < cfg.max_iters) {
        params = em_step(params, y, cfg);
        ++iterations;
        current = log_likelihood(params, y);
        if (std::abs(current - previous) <= cfg.tol * std::max(1.0, std::abs(previous))) {
          converged = true;
          break;
        }
        previous = current;
      }
      if (!have_best || current > best.loglik) {
        best.params = std::move(params);
        best.loglik = current;
        best.iterations = iterations;
        best.converged = converged;
        best.start = s;
        have_best = true;
      }
    } catch (const std::exception& e) {
      throw NumericalFailure("fit_mle start " + std::to_string(s) + ": " + e.what());
    }
  }
  best.n = y.size();
  best.penalized = best.loglik / static_cast<double>(y.size()) -
                   penalty(y.size(), r, components, mixture_dimension(components), pen);
  return best;
}

DiscreteMeasure2D pair_law(const HmmParams& params) {
  const Eigen::VectorXd mu = stationary_distribution(params.transition);
  const std::size_t r = params.states();
  DiscreteMeasure2D out;
  out.points.reserve(r * r);
  out.weights.reserve(r * r);
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = 0; b < r; ++b) {
      out.points.push_back({params.support[a], params.support[b]});
      out.weights.push_back(mu[static_cast<Eigen::Index>(a)] *
                            params.transition(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
    }
  }
  return out;
}

}  // namespace thmm
